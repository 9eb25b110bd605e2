import json
from pathlib import Path

import pytest

from cgc.frontend import parse_source
from cgc.pipeline import CompileOptions, check_source, compile_source
from cgc.profiles import lookup_profile
from cgc.sema import check

ROOT = Path(__file__).resolve().parent.parent
CORPUS = ROOT / "corpus"
MANIFEST = json.loads((CORPUS / "manifest.json").read_text())

SIMPLE_TRANSFORM = (CORPUS / "simple_transform.cg").read_text()
BRIGHT_LIGHT_MAP_DECAL = (CORPUS / "bright_light_map_decal.cg").read_text()

CORPUS_CASES = [(e["file"], e["entry"], p) for e in MANIFEST for p in e["profiles"]]


def typed(text: str, entry: str):
    _, tree = parse_source(text)
    return check(tree, entry)


def compiled(text: str, entry: str, profile: str, **limits):
    return compile_source(text, CompileOptions(entry, profile, dict(limits)))


def checked(text: str, entry: str, profile: str):
    return check_source(text, CompileOptions(entry, profile))


@pytest.fixture(scope="session")
def vertex_golden():
    return compiled(SIMPLE_TRANSFORM, "simpleTransform", "vs_1_1")


@pytest.fixture(scope="session")
def fragment_golden():
    return compiled(BRIGHT_LIGHT_MAP_DECAL, "brightLightMapDecal", "arbfp1")


@pytest.fixture
def profile():
    return lookup_profile
