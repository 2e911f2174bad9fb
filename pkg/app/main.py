"""HTTP surface over a built index."""

from contextlib import asynccontextmanager
from pathlib import Path
from typing import AsyncIterator, Optional

import uvicorn
from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse, RedirectResponse, Response
from loguru import logger as log

from app.config import RunConfig, load_run_config, settings
from app.dataset import dataset_routes
from app.dataset.dataset_store import Dataset
from app.db.enums import HTTPStatus
from app.errors import (
    CompletionError,
    ConfigError,
    EmbedError,
    EmptyStore,
    ExtractionError,
    SegmentationError,
    UnknownItem,
    UnknownLabel,
    VisualRagError,
)
from app.logs import setup_logging
from app.pipeline import prediction_routes
from app.pipeline.runner import build_clients
from app.vstore import VectorStore

ERROR_STATUS: dict[type[VisualRagError], HTTPStatus] = {
    UnknownItem: HTTPStatus.NOT_FOUND,
    UnknownLabel: HTTPStatus.NOT_FOUND,
    EmptyStore: HTTPStatus.SERVICE_UNAVAILABLE,
    EmbedError: HTTPStatus.BAD_GATEWAY,
    SegmentationError: HTTPStatus.BAD_GATEWAY,
    ExtractionError: HTTPStatus.BAD_GATEWAY,
    CompletionError: HTTPStatus.BAD_GATEWAY,
    ConfigError: HTTPStatus.INTERNAL_SERVER_ERROR,
}


def error_status(exc: VisualRagError) -> HTTPStatus:
    """Most specific mapped status, input errors otherwise."""
    for cls in type(exc).__mro__:
        if cls in ERROR_STATUS:
            return ERROR_STATUS[cls]
    return HTTPStatus.UNPROCESSABLE_ENTITY


async def load_resources(config: RunConfig) -> dict:
    """Dataset, store and clients for the service lifespan state."""
    db_pool = None
    if settings.DB_CONN_URL:
        from app.db.database import get_db_connection_pool, load_dataset

        db_pool = get_db_connection_pool(settings.DB_CONN_URL)
        await db_pool.open()
        dataset = await load_dataset(db_pool)
    elif config.manifest is not None:
        dataset = Dataset.from_manifest(config.manifest)
    else:
        raise ConfigError("set DB_CONN_URL or a manifest in the run config")

    if config.snapshot is not None and Path(config.snapshot).exists():
        store = VectorStore.restore(config.snapshot)
    else:
        log.warning(f"No snapshot at {config.snapshot}, serving an empty index")
        store = VectorStore(config.embedder.dimension)

    return {
        "config": config,
        "dataset": dataset,
        "store": store,
        "clients": build_clients(config),
        "db_pool": db_pool,
    }


def get_application(run_config: Optional[RunConfig] = None) -> FastAPI:
    """Get the FastAPI app instance, with settings."""

    @asynccontextmanager
    async def lifespan(
        app: FastAPI,  # dead: disable
    ) -> AsyncIterator[dict]:
        """FastAPI startup/shutdown event."""
        log.debug("Starting up FastAPI server.")
        config = run_config or load_run_config(
            Path(settings.RUN_CONFIG) if settings.RUN_CONFIG else None
        )
        state = await load_resources(config)

        yield state

        log.debug("Shutting down FastAPI server.")
        await state["clients"].aclose()
        if state["db_pool"] is not None:
            await state["db_pool"].close()

    _app = FastAPI(
        title=settings.APP_NAME,
        description="Visual RAG product classification and feature extraction",
        debug=settings.DEBUG,
        lifespan=lifespan,
        # NOTE REST APIs should not have trailing slashes
        redirect_slashes=False,
    )

    _app.include_router(dataset_routes.router)
    _app.include_router(prediction_routes.router)

    @_app.exception_handler(RequestValidationError)
    async def validation_exception_handler(
        request: Request,  # dead: disable
        exc: RequestValidationError,
    ):
        """Exception handler for more descriptive logging and traces."""
        errors = [
            {
                "loc": list(error["loc"]),
                "msg": error["msg"],
                "error": error["msg"] + str([x for x in error["loc"]]),
            }
            for error in exc.errors()
        ]
        return JSONResponse(
            status_code=HTTPStatus.UNPROCESSABLE_ENTITY, content={"errors": errors}
        )

    @_app.exception_handler(VisualRagError)
    async def pipeline_exception_handler(
        request: Request,  # dead: disable
        exc: VisualRagError,
    ):
        status_code = error_status(exc)
        log.warning(f"{request.url.path}: {exc.stage}: {exc}")
        return JSONResponse(
            status_code=status_code,
            content={
                "errors": [{"stage": exc.stage, "type": type(exc).__name__, "msg": str(exc)}]
            },
        )

    @_app.get("/")
    async def home():
        """Redirect home to docs."""
        return RedirectResponse("/docs")

    @_app.get("/__heartbeat__")
    async def heartbeat(request: Request):
        """Heartbeat that checks the index is loaded (and the DB, when used)."""
        if not len(request.state.store):
            return JSONResponse(
                status_code=HTTPStatus.SERVICE_UNAVAILABLE,
                content={"error": "vector store is empty"},
            )
        db_pool = request.state.db_pool
        if db_pool is not None:
            try:
                async with db_pool.connection() as db, db.cursor() as cur:
                    await cur.execute("SELECT 1")
            except Exception as e:
                log.warning(e)
                log.warning("Server failed __heartbeat__ database connection check")
                return JSONResponse(
                    status_code=HTTPStatus.INTERNAL_SERVER_ERROR, content={"error": str(e)}
                )
        return Response(status_code=HTTPStatus.OK)

    @_app.get("/__lbheartbeat__")
    async def simple_heartbeat():
        """Simple ping/pong API response."""
        return Response(status_code=HTTPStatus.OK)

    return _app


if __name__ == "__main__":
    setup_logging()
    uvicorn.run(
        get_application(),
        host="0.0.0.0",
        port=8000,
        log_level="debug" if settings.DEBUG else "info",
    )
