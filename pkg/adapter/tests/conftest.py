import shutil
import subprocess

import pytest


@pytest.fixture(scope="session")
def uba_cli():
    path = shutil.which("uba-sched")
    assert path, "uba-sched console script must be installed for parity tests"
    return path


@pytest.fixture
def cli_trace(uba_cli):
    """Run `uba-sched trace` on a config file and return the rate column."""

    def run(config_path, out_path):
        proc = subprocess.run(
            [uba_cli, "trace", "--config", str(config_path), "--out", str(out_path)],
            capture_output=True, text=True)
        assert proc.returncode == 0, proc.stderr
        lines = out_path.read_text().splitlines()
        assert lines[0] == "step,lr"
        return [float(line.split(",")[1]) for line in lines[1:]]

    return run
