from fractions import Fraction
from pathlib import Path

import pytest

from vvcbox.au import assemble_access_units, assign_timing
from vvcbox.nal import scan_annex_b
from vvcbox.synth import StreamSpec, make_stream

DATA_DIR = Path(__file__).parent / "data"
GOLDEN_DIR = Path(__file__).parent / "golden"

FPS25 = Fraction(25)


@pytest.fixture(scope="session")
def sample_es() -> bytes:
    """Bundled synthetic stream: 8 s at 25 fps, IDR every 2 s."""
    return (DATA_DIR / "sample.vvc").read_bytes()


@pytest.fixture(scope="session")
def sample_aus(sample_es):
    aus = assemble_access_units(scan_annex_b(sample_es))
    timescale = assign_timing(aus, FPS25)
    return aus, timescale


def timed_stream(spec: StreamSpec | None = None, fps: Fraction = FPS25):
    es = make_stream(spec or StreamSpec())
    aus = assemble_access_units(scan_annex_b(es))
    timescale = assign_timing(aus, fps)
    return es, aus, timescale
