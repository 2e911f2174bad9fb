"""PostgreSQL connection handling for the relational store."""

from psycopg_pool import AsyncConnectionPool
from loguru import logger as log

from app.dataset.dataset_store import Dataset
from app.db.models import DbDatasetItem


def get_db_connection_pool(conn_url: str) -> AsyncConnectionPool:
    """Get the connection pool for psycopg.

    NOTE the pool is opened by the caller (service lifespan or CLI command).
    """
    log.debug("Creating relational store connection pool")
    return AsyncConnectionPool(conninfo=conn_url, open=False)


async def save_dataset(db_pool: AsyncConnectionPool, dataset: Dataset) -> int:
    """Upsert every dataset item, in one transaction."""
    async with db_pool.connection() as conn:
        for item in dataset.items():
            await DbDatasetItem.create(conn, item)
    log.info(f"Stored {len(dataset)} items in the relational store")
    return len(dataset)


async def load_dataset(db_pool: AsyncConnectionPool) -> Dataset:
    """Read all items back, in insertion order."""
    async with db_pool.connection() as conn:
        rows = await DbDatasetItem.all(conn)
    dataset = Dataset(row.to_item() for row in rows)
    log.info(f"Loaded {len(dataset)} items from the relational store")
    return dataset
