import numpy as np

from holoball.streams import make_rng, spawn_seeds


def test_same_seed_same_stream():
    a = make_rng(7, 1, 2).standard_normal(16)
    b = make_rng(7, 1, 2).standard_normal(16)
    assert np.array_equal(a, b)


def test_different_path_different_stream():
    a = make_rng(7, 1, 2).standard_normal(16)
    b = make_rng(7, 1, 3).standard_normal(16)
    assert not np.array_equal(a, b)


def test_spawn_seeds_deterministic_and_distinct():
    s1 = spawn_seeds(7, 5, 9)
    s2 = spawn_seeds(7, 5, 9)
    assert list(s1) == list(s2)
    assert len(set(s1)) == 5
    assert list(spawn_seeds(8, 5, 9)) != list(s1)
