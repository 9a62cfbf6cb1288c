import numpy as np
import pytest

from bitextmine.embedding.providers import hash_embed


class FakeRemote:
    """Stands in for the HTTP transport of a remote provider.

    ``script`` is consumed one entry per call: an int is returned as the HTTP
    status (with no body), an exception instance is raised, and ``None`` (or an
    exhausted script) produces a normal 200 response with hash-derived vectors.
    """

    def __init__(self, clock=None, dim=8, script=(), vector_fn=None):
        self.clock = clock
        self.dim = dim
        self.script = list(script)
        self.vector_fn = vector_fn or (lambda text: hash_embed(text, self.dim, 7).tolist())
        self.calls = []

    def post_json(self, url, payload, headers, timeout):
        t = self.clock.now() if self.clock is not None else None
        self.calls.append((t, len(payload["texts"]), payload, headers))
        action = self.script.pop(0) if self.script else None
        if isinstance(action, BaseException):
            raise action
        if isinstance(action, int):
            return action, None
        return 200, {"embeddings": [self.vector_fn(x) for x in payload["texts"]]}

    @property
    def n_texts(self):
        return sum(n for _, n, _, _ in self.calls)


@pytest.fixture
def fake_remote():
    return FakeRemote


@pytest.fixture
def api_key(monkeypatch):
    monkeypatch.setenv("EMBED_API_KEY", "test-secret")
    return "test-secret"


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
