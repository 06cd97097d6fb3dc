import importlib.resources
import threading
import time

import pytest
import uvicorn

from spacerace import questions, world
from spacerace.server import ServerSettings, create_app


@pytest.fixture(scope="session")
def default_map() -> world.WorldMap:
    data = (importlib.resources.files("spacerace") / "assets/default_map.json").read_bytes()
    return world.load_map(data)


@pytest.fixture(scope="session")
def sample_bank() -> questions.QuestionBank:
    data = (importlib.resources.files("spacerace") / "assets/sample_bank.json").read_bytes()
    return questions.load_bank(data)


class LiveServer:
    """uvicorn in a daemon thread on an ephemeral loopback port."""

    def __init__(self, tmp_path, **settings_kwargs):
        self.settings = ServerSettings(
            host="127.0.0.1", port=0,
            bank_dir=tmp_path / "banks",
            map_dir=tmp_path / "maps",
            report_dir=tmp_path / "reports",
            **settings_kwargs)
        self.app = create_app(self.settings)
        config = uvicorn.Config(self.app, host="127.0.0.1", port=0, log_level="warning")
        self.server = uvicorn.Server(config)
        self.thread = threading.Thread(target=self.server.run, daemon=True)

    def start(self) -> "LiveServer":
        self.thread.start()
        deadline = time.time() + 15
        while not self.server.started:
            if time.time() > deadline:
                raise RuntimeError("server did not start")
            time.sleep(0.01)
        self.port = self.server.servers[0].sockets[0].getsockname()[1]
        self.ws_url = f"ws://127.0.0.1:{self.port}/ws"
        self.http_url = f"http://127.0.0.1:{self.port}"
        return self

    def stop(self) -> None:
        self.server.should_exit = True
        self.thread.join(timeout=10)

    @property
    def registry(self):
        return self.app.state.registry


@pytest.fixture()
def live_server(tmp_path):
    srv = LiveServer(tmp_path).start()
    yield srv
    srv.stop()


# One line per acceptance criterion, shown in the terminal summary.
ACCEPTANCE_RESULTS: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_RESULTS:
            terminalreporter.write_line(line)
