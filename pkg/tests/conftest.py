import sys
from functools import partial
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

from rbadyn import data_file  # noqa: E402
from rbadyn.assembly import assemble_prokaryotic, build_extension  # noqa: E402
from rbadyn.model import build_model, load_model_file  # noqa: E402


@pytest.fixture(scope="session")
def toy_spec():
    return load_model_file(data_file("toy_prokaryote"))


@pytest.fixture(scope="session")
def toy_model(toy_spec):
    return build_model(toy_spec)


@pytest.fixture(scope="session")
def toy_builder(toy_model):
    return partial(assemble_prokaryotic, toy_model)


@pytest.fixture(scope="session")
def euk():
    spec = load_model_file(data_file("toy_eukaryote"))
    model = build_model(spec)
    return spec, model, build_extension(spec, model)
