import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

import pytest

from advcontract.ml import load_bundle, save_bundle, train_system
from advcontract.synth.dataset import build_world_dataset
from advcontract.synth.world import generate_world


@pytest.fixture(scope="session")
def toy_world():
    return generate_world(400, seed=11)


@pytest.fixture(scope="session")
def toy_records(toy_world):
    return build_world_dataset(toy_world).records


@pytest.fixture(scope="session")
def toy_bundle(tmp_path_factory, toy_records):
    from worlds import TOY_CONFIG

    path = tmp_path_factory.mktemp("bundle") / "toy"
    save_bundle(train_system(toy_records, TOY_CONFIG), path)
    return path


@pytest.fixture(scope="session")
def toy_system(toy_bundle):
    return load_bundle(toy_bundle)


def pytest_terminal_summary(terminalreporter):
    from worlds import ACCEPTANCE

    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[n])
