import pytest
from PIL import Image

from app.errors import CompletionError
from app.pipeline.completion import complete
from app.pipeline.pipeline_schemas import FewShotSample
from app.pipeline.prompt import DEFAULT_TASK, generate_prompt
from app.pipeline.vlm_clients import MockScript, MockVlmClient
from tests.conftest import make_item


@pytest.fixture
def prompt(image_file):
    brands = ["Lorenz", "Barilla", "Persil"]
    context = [
        FewShotSample(
            item=make_item(
                f"s{i}",
                "A",
                image_file,
                product={"brand": brand, "GTINs": ["04018077683015"]},
                promotion={"price": 0.99},
            )
        )
        for i, brand in enumerate(brands, start=1)
    ]
    query = Image.new("RGB", (16, 16), "white")
    return generate_prompt(DEFAULT_TASK, context, query, 128_000, query_id="q1")


@pytest.mark.anyio
async def test_echo_answer_in_one_attempt(prompt):
    client = MockVlmClient(MockScript(echo_first_sample=True))
    trace = await complete(prompt, client)
    assert trace.prediction == prompt.samples[0].target
    assert trace.prediction.brand == "Lorenz"
    assert len(trace.attempts) == 1
    assert not trace.reduced
    assert trace.input_tokens == prompt.estimate_tokens()
    assert trace.output_tokens > 0


@pytest.mark.anyio
async def test_all_null_answer_is_retried_with_one_sample(prompt):
    client = MockVlmClient(MockScript(echo_first_sample=True, null_above_samples=1))
    trace = await complete(prompt, client)
    assert [(a.n_samples, a.all_null) for a in trace.attempts] == [(3, True), (1, False)]
    assert trace.reduced
    assert trace.prediction.brand == "Lorenz"
    assert [r.n_samples for r in client.requests] == [3, 1]
    assert client.requests[1].samples == prompt.samples[:1]
    assert trace.input_tokens == prompt.estimate_tokens() + prompt.truncated(1).estimate_tokens()
    assert trace.output_tokens == sum(a.output_tokens for a in trace.attempts)


@pytest.mark.anyio
async def test_at_most_one_retry(prompt):
    client = MockVlmClient(MockScript())
    trace = await complete(prompt, client)
    assert len(trace.attempts) == 2
    assert all(a.all_null for a in trace.attempts)
    assert trace.prediction.is_all_null


@pytest.mark.anyio
async def test_single_sample_prompt_is_not_retried(prompt):
    client = MockVlmClient(MockScript())
    trace = await complete(prompt.truncated(1), client)
    assert len(trace.attempts) == 1


@pytest.mark.anyio
async def test_unparseable_answer_counts_as_all_null(prompt):
    client = MockVlmClient(MockScript(responses={"q1": "{not json"}))
    trace = await complete(prompt, client)
    assert len(trace.attempts) == 2
    assert all(a.schema_error for a in trace.attempts)
    assert trace.prediction.is_all_null


@pytest.mark.anyio
async def test_listing_answer_is_parsed(prompt):
    client = MockVlmClient(
        MockScript(responses={"q1": "brand='Barilla'\nprice=1.79\nweight_unit=Gramm"})
    )
    trace = await complete(prompt, client)
    assert trace.prediction.brand == "Barilla"
    assert str(trace.prediction.price) == "1.79"
    assert trace.prediction.weight_unit == "Gramm"


class BrokenClient(MockVlmClient):
    async def complete(self, prompt, schema=None):
        raise RuntimeError("connection reset")


@pytest.mark.anyio
async def test_transport_failure_is_a_completion_error(prompt):
    with pytest.raises(CompletionError):
        await complete(prompt, BrokenClient())
