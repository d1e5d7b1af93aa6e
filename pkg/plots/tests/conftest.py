"""Generate real simulator CSVs once per session through its CLI.

The plot package's contract is the CSV schemas, so fixtures produce inputs
with the actual tool rather than hand-written files: a full-rate VFR2 sweep
(the saturation curve), a small disturbance sweep containing collision
cells, one sampled run, and one reservation trace.
"""

import subprocess
import sys
from pathlib import Path

import pytest

SAMPLES_SCN = """\
mode = VFR
vfr.d_S = 20
arrival_rate = 0.15
sim_end = 600
disturbance.enabled = true
disturbance.t_inv = 100
disturbance.tau = 25
"""

TRACE_SCN = """\
mode = DFR
dfr.d_prop = 0.2
arrival_rate = 0.2
sim_end = 150
disturbance.enabled = true
disturbance.t_inv = none
disturbance.tau = 15
"""


def simulate(*args: str) -> None:
    subprocess.run([sys.executable, "-m", "corridorsim.cli", *args],
                   check=True, capture_output=True, text=True)


@pytest.fixture(scope="session")
def csv_dir(tmp_path_factory) -> Path:
    return tmp_path_factory.mktemp("sim-csvs")


@pytest.fixture(scope="session")
def sweep_vfr2_csv(csv_dir) -> Path:
    out = csv_dir / "vfr2"
    simulate("sweep", "--scenarios", "none", "--modes", "VFR2",
             "--rates", "0.01:0.25:0.01", "--out", str(out))
    return out / "sweep.csv"


@pytest.fixture(scope="session")
def sweep_disturbed_csv(csv_dir) -> Path:
    out = csv_dir / "disturbed"
    simulate("sweep", "--scenarios", "inv100_tau25", "--modes", "VFR1,DFR2",
             "--rates", "0.05:0.25:0.05", "--out", str(out))
    return out / "sweep.csv"


@pytest.fixture(scope="session")
def samples_csv(csv_dir) -> Path:
    scn = csv_dir / "samples.scn"
    scn.write_text(SAMPLES_SCN)
    out = csv_dir / "samples"
    simulate("run", "--scenario", str(scn), "--out", str(out))
    return out / "samples.csv"


@pytest.fixture(scope="session")
def trace_csv(csv_dir) -> Path:
    scn = csv_dir / "trace.scn"
    scn.write_text(TRACE_SCN)
    out = csv_dir / "trace"
    simulate("trace", "--scenario", str(scn), "--out", str(out))
    return out / "trace.csv"
