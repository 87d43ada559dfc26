from __future__ import annotations

import pytest

from cloudtree.netkv import RemoteStore, serve
from cloudtree.node import META_KEY, item_to_node
from cloudtree.store import FileStore, MemoryStore, StoreConfig


class Backend:
    """A store under test plus direct access to the engine holding its data."""

    def __init__(self, kind, store, engine, server=None):
        self.kind = kind
        self.store = store
        self.engine = engine
        self.server = server

    def nodes(self, table):
        return {i.key: item_to_node(i) for i in self.engine.scan(table) if i.key != META_KEY}


@pytest.fixture(params=["memory", "file", "tcp"])
def backend(request, tmp_path):
    config = StoreConfig(batch_limit=25)
    if request.param == "memory":
        store = MemoryStore(config)
        yield Backend("memory", store, store)
    elif request.param == "file":
        store = FileStore(tmp_path / "kv.snapshot", config)
        yield Backend("file", store, store)
    else:
        engine = MemoryStore(config)
        server = serve("127.0.0.1:0", engine)
        client = RemoteStore(server.address, batch_limit=25)
        try:
            yield Backend("tcp", client, engine, server)
        finally:
            client.close()
            server.stop()


@pytest.fixture
def tcp_server():
    engine = MemoryStore()
    server = serve("127.0.0.1:0", engine)
    try:
        yield server
    finally:
        server.stop()


# -- acceptance summary ------------------------------------------------------------

_ACCEPTANCE: list[tuple[str, str, str]] = []


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    criterion = item.get_closest_marker("criterion")
    if criterion is None or report.when != "call":
        return
    details = getattr(item, "criterion_details", "")
    _ACCEPTANCE.append((criterion.args[0], "PASS" if report.passed else "FAIL", details))


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(name): acceptance criterion")


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, status, details in _ACCEPTANCE:
        line = f"{status}  {name}"
        if details:
            line += f"  [{details}]"
        terminalreporter.write_line(line)
