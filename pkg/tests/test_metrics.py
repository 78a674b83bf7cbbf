import numpy as np
import pytest
from pytest import approx

from kslearn.bspline import SplineModel, uniform_partition
from kslearn.data import TrajectoryDataset, generate_dataset
from kslearn.kernels import Cutoff, Epsilon, KernelSpec, truth_profile
from kslearn.metrics import (
    EmpiricalDensity,
    error_report,
    pairwise_density,
    profile_error_rel,
    reconstruct,
    traj_error_rel,
)


def const_dataset(positions, n_frames=3, d=1, mode="deterministic"):
    x = np.asarray(positions, dtype=float).reshape(1, 1, -1, d)
    frames = np.repeat(x, n_frames, axis=1)
    kernel = (
        KernelSpec(d=d, chi=1.0, reg=Cutoff(0.01))
        if mode == "deterministic"
        else KernelSpec(d=d, chi=1.0, reg=Epsilon(0.01))
    )
    return TrajectoryDataset(
        frames=frames, times=0.01 * np.arange(n_frames), mode=mode,
        kernel=kernel, tau=1e-3,
    )


class TestPairwiseDensity:
    def test_constant_pair_is_point_mass(self):
        ds = const_dataset([0.0, 1.0])
        dens = pairwise_density(ds, 50)
        assert dens.weights.sum() == approx(1.0, abs=1e-12)
        assert np.count_nonzero(dens.weights) == 1
        idx = np.argmax(dens.weights)
        assert dens.edges[idx] <= 1.0 <= dens.edges[idx + 1]

    def test_total_mass_one(self):
        kernel = KernelSpec(d=2, chi=1.0, reg=Epsilon(0.01))
        ds = generate_dataset("stochastic", kernel, N=5, M=3, T=0.02, tau=1e-3,
                              dt_obs=0.01, seed=0)
        dens = pairwise_density(ds, 37)
        assert dens.weights.sum() == approx(1.0, abs=1e-12)
        assert np.all(dens.weights >= 0.0)

    def test_equilateral_triangle_single_bin(self):
        s = 0.4
        pts = np.array([[0.0, 0.0], [s, 0.0], [s / 2, s * np.sqrt(3) / 2]])
        ds = const_dataset(pts.ravel(), d=2, n_frames=2)
        dens = pairwise_density(ds, 400)
        assert np.count_nonzero(dens.weights) == 1
        assert dens.weights.max() == approx(1.0, abs=1e-12)

    def test_default_grid_size(self):
        ds = const_dataset([0.0, 0.3, 1.0])
        dens = pairwise_density(ds)
        assert dens.edges.size == 401


class TestEmpiricalDensityValidation:
    def test_weights_must_sum_to_one(self):
        with pytest.raises(ValueError):
            EmpiricalDensity(edges=np.array([0.0, 1.0, 2.0]), weights=np.array([0.6, 0.6]))

    def test_negative_mass_rejected(self):
        with pytest.raises(ValueError):
            EmpiricalDensity(edges=np.array([0.0, 1.0, 2.0]), weights=np.array([1.5, -0.5]))


class TestTrajErrorRel:
    def test_identical_is_zero(self):
        ds = const_dataset([0.1, 0.9])
        assert traj_error_rel(ds, ds) == 0.0

    def test_doubling_is_one(self):
        kernel = KernelSpec(d=2, chi=1.0, reg=Epsilon(0.01))
        ref = generate_dataset("stochastic", kernel, N=4, M=2, T=0.02, tau=1e-3,
                               dt_obs=0.01, seed=1)
        doubled = TrajectoryDataset(
            frames=2.0 * ref.frames, times=ref.times, mode=ref.mode,
            kernel=ref.kernel, tau=ref.tau, eta=ref.eta, seed=ref.seed,
        )
        assert traj_error_rel(ref, doubled) == approx(1.0, rel=1e-12)

    def test_single_difference_plug_in(self):
        # reference frame at 2, reconstruction at 3 -> ratio 1/2 for any dt
        ref = const_dataset([2.0, 2.0], n_frames=2)
        rec_frames = ref.frames.copy()
        rec_frames[:, 1] = 3.0
        rec = TrajectoryDataset(
            frames=rec_frames, times=ref.times, mode=ref.mode,
            kernel=ref.kernel, tau=ref.tau,
        )
        assert traj_error_rel(ref, rec) == approx(0.5, rel=1e-12)

    def test_initial_frame_excluded(self):
        # disagreement confined to t0 does not count
        ref = const_dataset([0.2, 0.8], n_frames=3)
        rec_frames = ref.frames.copy()
        rec_frames[:, 0] += 5.0
        rec = TrajectoryDataset(
            frames=rec_frames, times=ref.times, mode=ref.mode,
            kernel=ref.kernel, tau=ref.tau,
        )
        assert traj_error_rel(ref, rec) == 0.0

    def test_relabeling_invariance(self):
        kernel = KernelSpec(d=2, chi=1.0, reg=Epsilon(0.01))
        ref = generate_dataset("stochastic", kernel, N=5, M=2, T=0.02, tau=1e-3,
                               dt_obs=0.01, seed=2)
        rec = TrajectoryDataset(
            frames=ref.frames + 0.01, times=ref.times, mode=ref.mode,
            kernel=ref.kernel, tau=ref.tau, eta=ref.eta, seed=ref.seed,
        )
        base = traj_error_rel(ref, rec)
        perm = np.random.default_rng(0).permutation(5)
        ref_p = TrajectoryDataset(
            frames=ref.frames[:, :, perm], times=ref.times, mode=ref.mode,
            kernel=ref.kernel, tau=ref.tau, eta=ref.eta, seed=ref.seed,
        )
        rec_p = TrajectoryDataset(
            frames=rec.frames[:, :, perm], times=rec.times, mode=rec.mode,
            kernel=rec.kernel, tau=rec.tau, eta=rec.eta, seed=rec.seed,
        )
        assert traj_error_rel(ref_p, rec_p) == approx(base, rel=1e-12)

    def test_shape_mismatch_rejected(self):
        a = const_dataset([0.1, 0.9], n_frames=2)
        b = const_dataset([0.1, 0.9], n_frames=3)
        with pytest.raises(ValueError):
            traj_error_rel(a, b)


class TestProfileErrorRel:
    def test_exact_match_is_zero(self):
        part = uniform_partition(0.1, 1.0, 5)
        model = SplineModel(part, np.ones(part.n_basis))
        dens = EmpiricalDensity(
            edges=np.linspace(0.1, 1.0, 11), weights=np.full(10, 0.1)
        )
        assert profile_error_rel(lambda r: np.ones_like(r), model, dens) == approx(0.0, abs=1e-12)

    def test_homogeneity(self):
        # learned = (1+s) * truth exactly, via callables
        s = 0.37
        truth = lambda r: 2.0 + r
        dens = EmpiricalDensity(
            edges=np.linspace(0.1, 1.0, 11), weights=np.full(10, 0.1)
        )
        err = profile_error_rel(truth, lambda r: (1 + s) * np.asarray(truth(r)), dens)
        assert err == approx(s, rel=1e-12)

    def test_point_mass_plug_in(self):
        dens = EmpiricalDensity(
            edges=np.array([0.95, 1.05, 1.15]), weights=np.array([1.0, 0.0])
        )
        err = profile_error_rel(
            lambda r: 2.0 * np.ones_like(r), lambda r: np.ones_like(r), dens
        )
        assert err == approx(0.5, rel=1e-12)

    def test_zero_truth_rejected(self):
        dens = EmpiricalDensity(
            edges=np.array([0.0, 0.5, 1.0]), weights=np.array([0.5, 0.5])
        )
        with pytest.raises(ValueError):
            profile_error_rel(lambda r: np.zeros_like(r), lambda r: np.ones_like(r), dens)

    def test_stable_under_bin_refinement(self):
        kernel = KernelSpec(d=2, chi=1.0, reg=Epsilon(0.01))
        ds = generate_dataset("stochastic", kernel, N=8, M=4, T=0.05, tau=1e-3,
                              dt_obs=0.01, seed=3)
        truth = truth_profile(kernel)
        smooth = lambda r: truth.phi(r) * 1.1
        e400 = profile_error_rel(truth.phi, smooth, pairwise_density(ds, 400))
        e800 = profile_error_rel(truth.phi, smooth, pairwise_density(ds, 800))
        assert abs(e400 - e800) < 0.01 * e400 + 1e-12


class TestReconstruct:
    def test_deterministic_truth_profile_is_exact(self):
        kernel = KernelSpec(d=2, chi=1.0, reg=Cutoff(0.05))
        ds = generate_dataset("deterministic", kernel, N=5, M=2, T=0.02, tau=1e-3,
                              dt_obs=0.01, seed=4)
        rec = reconstruct(ds, truth_profile(kernel))
        assert np.array_equal(rec.frames, ds.frames)

    def test_stochastic_truth_profile_shares_noise(self):
        kernel = KernelSpec(d=2, chi=1.0, reg=Epsilon(0.01))
        ds = generate_dataset("stochastic", kernel, N=5, M=3, T=0.02, tau=1e-3,
                              dt_obs=0.01, eta=0.01, seed=5)
        rec = reconstruct(ds, truth_profile(kernel))
        assert np.array_equal(rec.frames, ds.frames)

    def test_error_report_schema(self):
        kernel = KernelSpec(d=2, chi=1.5, reg=Epsilon(0.01))
        ds = generate_dataset("stochastic", kernel, N=5, M=2, T=0.02, tau=1e-3,
                              dt_obs=0.01, eta=0.01, seed=6)
        lo, hi = ds.distance_range()
        part = uniform_partition(lo, hi, 6)
        model = SplineModel(part, np.ones(part.n_basis))
        report = error_report(ds, model, P=50)
        assert set(report) >= {
            "traj_err_rel", "profile_err_rel", "chi", "d", "mode",
            "n_breakpoints", "r_c_or_eps",
        }
        assert report["chi"] == 1.5
        assert report["mode"] == "stochastic"
        assert report["n_breakpoints"] == 6
        assert report["r_c_or_eps"] == 0.01
        assert report["traj_err_rel"] >= 0.0
        assert report["profile_err_rel"] >= 0.0
