import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from infraqa.core import Box3D, FrameRecord, ObjectClass, ObjectRecord


@pytest.fixture
def rng():
    return np.random.default_rng(20240824)


def make_box(x=0.0, y=0.0, z=0.5, l=1.0, w=1.0, h=1.0, yaw=0.0):
    return Box3D(x, y, z, l, w, h, yaw)


def make_obj(cls=ObjectClass.CAR, box=None, score=None, track_id=None, **box_kw):
    return ObjectRecord(cls=cls, box=box or make_box(**box_kw),
                        score=score, track_id=track_id)


def make_frame(index, objects, interval_us=100_000):
    return FrameRecord(index, index * interval_us, tuple(objects))


def random_box(rng, span=10.0):
    return Box3D(
        float(rng.uniform(-span, span)), float(rng.uniform(-span, span)),
        float(rng.uniform(-2.0, 2.0)),
        float(rng.uniform(0.5, 5.0)), float(rng.uniform(0.5, 3.0)),
        float(rng.uniform(0.5, 3.0)), float(rng.uniform(-np.pi, np.pi)))


def nearby_box(rng, base, jitter=1.5):
    return Box3D(
        base.center_x + float(rng.uniform(-jitter, jitter)),
        base.center_y + float(rng.uniform(-jitter, jitter)),
        base.center_z + float(rng.uniform(-0.5, 0.5)),
        float(rng.uniform(0.5, 5.0)), float(rng.uniform(0.5, 3.0)),
        float(rng.uniform(0.5, 3.0)), float(rng.uniform(-np.pi, np.pi)))
