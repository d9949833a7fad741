import numpy as np
import pytest

from conftest import make_data
from ftcalib.errors import (AmbiguousNullspace, DegenerateInput, NonConvergence, PreconditionError,
                            RankDeficient)
from ftcalib.numerics import least_squares
from ftcalib.so3 import rotation_angle_between
from ftcalib.unknown_gravity import (UnknownGravityMethod, build_operators, calibrate_eigen,
                                     calibrate_iterative, calibrate_nullspace,
                                     fixed_point_operator, iterate_alternating,
                                     pairwise_difference_operator, vec)

ESTIMATORS = [calibrate_eigen, calibrate_nullspace, calibrate_iterative]


def rel(a, b):
    return np.linalg.norm(np.asarray(a) - b) / np.linalg.norm(b)


def test_operator_shapes(clean_unknown):
    data, truth, _ = clean_unknown
    ops = build_operators(data)
    assert ops.D.shape == (300, 3)
    assert ops.F.shape == (300, 9)
    np.testing.assert_array_equal(ops.D[:3], data.orientations[0])
    R = np.random.default_rng(0).standard_normal((3, 3))
    np.testing.assert_allclose(ops.F @ vec(R), (data.forces @ R.T).reshape(-1), atol=1e-10)


def test_identity_orientation_block():
    data, _, _ = make_data(0, num_poses=4)
    data = type(data)(np.array([np.eye(3)] * 4), data.forces)
    np.testing.assert_array_equal(build_operators(data).D[:3], np.eye(3))


def test_pairwise_operator_rows(clean_unknown):
    data, truth, _ = clean_unknown
    small = data.subset(np.arange(6))
    M = pairwise_difference_operator(small)
    assert M.shape == (3 * 15, 9)
    np.testing.assert_allclose(M @ vec(truth.rotation.T), 0, atol=1e-10)


def test_fixed_point(clean_unknown):
    data, truth, _ = clean_unknown
    K = fixed_point_operator(build_operators(data))
    r = vec(truth.rotation.T)
    assert np.linalg.norm(K @ r - r) < 1e-10


@pytest.mark.parametrize("estimator", ESTIMATORS)
def test_exact_recovery(clean_unknown, estimator):
    data, truth, _ = clean_unknown
    est = estimator(data)
    assert rotation_angle_between(est.rotation, truth.rotation) < 1e-8
    assert rel(est.gravity_scaled, truth.gravity_scaled) < 1e-8
    assert est.residual < 1e-8
    np.testing.assert_array_equal(est.flange_from_sensor, est.rotation.T)


@pytest.mark.parametrize("estimator", ESTIMATORS)
def test_gravity_never_stale(estimator):
    data, _, _ = make_data(21, gravity_std=100.0, noise_std_force=1.0)
    est = estimator(data)
    ops = build_operators(data)
    g = least_squares(ops.D, ops.F @ vec(est.flange_from_sensor))
    assert rel(est.gravity_scaled, g) < 1e-10


def test_eigen_snr100_gravity_error():
    errs = []
    for seed in range(200):
        data, truth, _ = make_data(seed, gravity_std=100.0, noise_std_force=1.0)
        errs.append(rel(calibrate_eigen(data).gravity_scaled, truth.gravity_scaled))
    assert np.median(errs) < 0.01


def test_identical_poses_rank_deficient(clean_unknown):
    data, _, _ = clean_unknown
    same = data.subset([3] * 10)
    with pytest.raises(RankDeficient):
        calibrate_eigen(same)
    with pytest.raises(RankDeficient):
        calibrate_iterative(same)


def test_nullspace_records_gap(clean_unknown):
    data, _, _ = clean_unknown
    est = calibrate_nullspace(data)
    assert est.method is UnknownGravityMethod.NULLSPACE
    assert est.nullspace_gap > 1e6


def test_nullspace_two_poses_ambiguous(clean_unknown):
    data, _, _ = clean_unknown
    # one pair gives 3 equations for 9 unknowns: nullspace dimension >= 6
    with pytest.raises(AmbiguousNullspace):
        calibrate_nullspace(data.subset([0, 1]))
    with pytest.raises(PreconditionError):
        calibrate_nullspace(data.subset([0]))


def test_nullspace_matches_eigen_high_snr():
    for seed in range(20):
        data, _, _ = make_data(seed, gravity_std=100.0, noise_std_force=0.01)
        a = calibrate_eigen(data).rotation
        b = calibrate_nullspace(data).rotation
        assert rotation_angle_between(a, b) < 1e-6


def test_iterative_matches_eigen_high_snr():
    # the projected fixed point departs from the eigenvector linearly in the noise
    for seed in range(20):
        data, _, _ = make_data(seed, gravity_std=100.0, noise_std_force=0.01)
        a = calibrate_eigen(data).rotation
        b = calibrate_iterative(data).rotation
        assert rotation_angle_between(a, b) < 1e-5


def test_iterative_six_iterations_suffice_noise_free():
    errs = []
    for seed in range(50):
        data, truth, _ = make_data(seed, gravity_std=100.0)
        states = list(iterate_alternating(build_operators(data), max_iters=6, tol=0.0))
        errs.append(rotation_angle_between(states[-1].rotation, truth.rotation))
    assert np.median(errs) < 1e-8


def test_iterative_converges_from_bad_initial_gravity():
    rng = np.random.default_rng(99)
    n_negative = 0
    for seed in range(40):
        data, truth, _ = make_data(seed, gravity_std=100.0, noise_std_force=1.0)
        g0 = rng.standard_normal(3)
        n_negative += g0 @ truth.gravity_scaled < 0
        est = calibrate_iterative(data, initial_gravity=g0)
        assert est.converged
        assert rotation_angle_between(est.rotation, truth.rotation) < 0.05
    assert n_negative > 0


def test_iterative_iteration_count_snr100():
    counts = []
    for seed in range(100):
        data, _, _ = make_data(seed, gravity_std=100.0, noise_std_force=1.0)
        counts.append(calibrate_iterative(data).iterations_used)
    assert np.median(counts) <= 10
    assert max(counts) < 50


def test_iterative_half_steps_decrease_residual():
    data, _, _ = make_data(3, gravity_std=100.0, noise_std_force=5.0)
    ops = build_operators(data)

    def resid(R, g):
        return np.linalg.norm(ops.F @ vec(R) - ops.D @ g)

    prev_R = None
    for st in iterate_alternating(ops, initial_gravity=np.ones(3), max_iters=15, tol=0.0):
        if prev_R is not None:
            assert resid(st.rotation_unconstrained, st.gravity_in) <= resid(prev_R, st.gravity_in) * (1 + 1e-12)
        assert resid(st.flange_from_sensor, st.gravity) <= resid(st.flange_from_sensor, st.gravity_in) * (1 + 1e-12)
        prev_R = st.flange_from_sensor


def test_iterative_nonconvergence_carries_estimate():
    data, _, _ = make_data(2, gravity_std=100.0, noise_std_force=1.0)
    with pytest.raises(NonConvergence) as info:
        calibrate_iterative(data, max_iters=2, tol=1e-14)
    est = info.value.estimate
    assert est is not None and not est.converged and est.iterations_used == 2


def test_iterative_zero_initial_gravity_degenerate(clean_unknown):
    data, _, _ = clean_unknown
    with pytest.raises(DegenerateInput):
        calibrate_iterative(data, initial_gravity=np.zeros(3))
    with pytest.raises(PreconditionError):
        calibrate_iterative(data, max_iters=0)


def test_three_way_agreement_snr100():
    for seed in range(20):
        data, truth, _ = make_data(seed, gravity_std=100.0, noise_std_force=1.0)
        rots = [f(data).rotation for f in ESTIMATORS]
        floor = min(rotation_angle_between(R, truth.rotation) for R in rots)
        for i in range(3):
            for j in range(i + 1, 3):
                assert rotation_angle_between(rots[i], rots[j]) <= 10 * floor


def test_error_decreases_with_noise():
    medians = []
    for sigma in (10.0, 3.0, 1.0, 0.3, 0.1):
        errs = []
        for seed in range(200):
            data, truth, _ = make_data(seed, num_poses=30, gravity_std=100.0, noise_std_force=sigma)
            errs.append(rotation_angle_between(calibrate_eigen(data).rotation, truth.rotation))
        medians.append(np.median(errs))
    assert all(b <= a for a, b in zip(medians, medians[1:]))
