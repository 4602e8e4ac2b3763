"""Action-following composition and aggregation."""
import numpy as np
import pytest

from worldlens import errors
from worldlens.action import (
    EpisodeSubScores,
    ads,
    aggregate_episodes,
    displacement_error,
    pdms,
    route_completion,
)


def _episode(nc=1.0, dac=1.0, ep=1.0, ttc=1.0, comfort=1.0,
             d_completed=100.0, d_total=100.0):
    return EpisodeSubScores(nc=nc, dac=dac, ep=ep, ttc=ttc, comfort=comfort,
                            d_completed=d_completed, d_total=d_total)


def test_pdms_boundary_cases():
    assert pdms(_episode()) == 1.0
    assert pdms(_episode(nc=0.0)) == 0.0
    assert pdms(_episode(dac=0.0)) == 0.0


def test_pdms_worked_example():
    s = _episode(nc=0.9, dac=1.0, ep=0.8, ttc=0.9, comfort=0.7)
    assert pdms(s) == pytest.approx(0.74250, abs=1e-5)


def test_pdms_validates_ranges():
    with pytest.raises(errors.OutOfRangeSubScore):
        pdms(_episode(nc=1.2))
    with pytest.raises(errors.ZeroRoute):
        pdms(_episode(d_total=0.0))


def test_route_completion_and_clamp():
    assert route_completion(_episode(d_completed=50.0)) == 0.5
    with pytest.warns(UserWarning):
        assert route_completion(_episode(d_completed=120.0)) == 1.0


def test_ads_identity_over_random_episodes():
    rng = np.random.default_rng(71)
    for _ in range(1000):
        s = _episode(nc=rng.uniform(), dac=rng.uniform(), ep=rng.uniform(),
                     ttc=rng.uniform(), comfort=rng.uniform(),
                     d_completed=rng.uniform(0, 100), d_total=100.0)
        assert abs(ads(s) - route_completion(s) * pdms(s)) <= 1e-9


def test_aggregate_is_mean_of_per_episode_values():
    episodes = [_episode(nc=0.9, ep=0.5, d_completed=80.0),
                _episode(dac=0.8, ttc=0.6, d_completed=40.0)]
    agg = aggregate_episodes(episodes)
    assert agg["pdms"] == pytest.approx(np.mean([pdms(e) for e in episodes]))
    assert agg["route_completion"] == pytest.approx(
        np.mean([route_completion(e) for e in episodes]))
    assert agg["ads"] == pytest.approx(np.mean([ads(e) for e in episodes]))
    with pytest.raises(errors.LengthMismatch):
        aggregate_episodes([])


def test_displacement_error():
    gen = [np.array([[0.0, 0.0], [3.0, 4.0]])]
    gt = [np.array([[0.0, 0.0], [0.0, 0.0]])]
    assert displacement_error(gen, gt) == pytest.approx(2.5)
    with pytest.raises(errors.LengthMismatch):
        displacement_error(gen, [])
    with pytest.raises(errors.LengthMismatch):
        displacement_error(gen, [np.zeros((3, 2))])
