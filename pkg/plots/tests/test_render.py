import json

import numpy as np
import pytest

from ksplots.cli import main
from ksplots.io import SchemaError, read_density, read_model, read_profile_curve, read_trajectory
from ksplots.render import FigureSpec, render


@pytest.fixture
def bundle(tmp_path):
    """Synthetic files following the documented kslearn output schemas."""
    P = 40
    r = np.linspace(0.02, 1.2, P + 1)
    truth = 1.0 / (2 * np.pi * np.maximum(r, 0.05) ** 2)
    learned = truth * (1 + 0.05 * np.sin(8 * r))
    curve = tmp_path / "profile_curve.csv"
    curve.write_text(
        "r,phi_true,phi_learned\n"
        + "\n".join(f"{a:.17g},{b:.17g},{c:.17g}" for a, b, c in zip(r, truth, learned))
        + "\n"
    )
    masses = np.exp(-((r[:-1] - 0.3) ** 2) / 0.05)
    masses /= masses.sum()
    density = tmp_path / "density.csv"
    density.write_text(
        "r_left,r_right,mass\n"
        + "\n".join(
            f"{a:.17g},{b:.17g},{c:.17g}" for a, b, c in zip(r[:-1], r[1:], masses)
        )
        + "\n"
    )
    report = tmp_path / "report.json"
    report.write_text(json.dumps({
        "traj_err_rel": 1e-3, "profile_err_rel": 0.05, "chi": 1.0, "d": 2,
        "mode": "deterministic", "n_breakpoints": 20, "r_c_or_eps": 0.05,
    }))
    times = 0.01 * np.arange(5)
    rng = np.random.default_rng(0)
    frames = rng.random((5, 6, 2)).cumsum(axis=0) * 0.1
    lines = ["l,t,i,x1,x2"]
    for l, t in enumerate(times):
        for i in range(6):
            lines.append(f"{l},{t:.17g},{i},{frames[l, i, 0]:.17g},{frames[l, i, 1]:.17g}")
    traj = tmp_path / "recon_traj_0000.csv"
    traj.write_text("\n".join(lines) + "\n")
    breaks = np.linspace(0.02, 1.2, 9)
    model_u = tmp_path / "model_uniform.json"
    model_u.write_text(json.dumps({
        "breakpoints": breaks.tolist(), "degree": 3,
        "coefficients": np.linspace(3.0, 0.1, breaks.size - 1 + 3).tolist(),
    }))
    breaks_a = np.sort(np.concatenate([[0.02, 1.2], 0.02 + 1.18 * np.linspace(0.05, 0.6, 7) ** 2]))
    model_a = tmp_path / "model_adaptive.json"
    model_a.write_text(json.dumps({
        "breakpoints": breaks_a.tolist(), "degree": 3,
        "coefficients": np.linspace(3.0, 0.1, breaks_a.size - 1 + 3).tolist(),
    }))
    return dict(curve=curve, density=density, report=report, traj=traj,
                model_u=model_u, model_a=model_a, dir=tmp_path)


class TestReaders:
    def test_profile_curve(self, bundle):
        r, t, v = read_profile_curve(bundle["curve"])
        assert r.size == 41 and t.size == 41 and v.size == 41

    def test_density_edges(self, bundle):
        edges, masses = read_density(bundle["density"])
        assert edges.size == masses.size + 1
        assert masses.sum() == pytest.approx(1.0, abs=1e-9)

    def test_trajectory(self, bundle):
        times, frames = read_trajectory(bundle["traj"])
        assert times.shape == (5,)
        assert frames.shape == (5, 6, 2)

    def test_model_partition_of_unity(self, bundle):
        model = read_model(bundle["model_u"])
        grid = np.linspace(model.a, model.b, 50)
        flat = read_model(bundle["model_u"])
        # all-equal coefficients reproduce the constant
        flat.coefficients[:] = 1.0
        const = type(model)(model.breakpoints, model.degree, np.ones(model.coefficients.size))
        assert const(grid) == pytest.approx(np.ones(50), abs=1e-12)
        assert const(np.array([-5.0, 99.0])) == pytest.approx([1.0, 1.0], abs=1e-12)

    def test_bad_header_rejected(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("radius,true,learned\n0,1,1\n")
        with pytest.raises(SchemaError):
            read_profile_curve(bad)

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            read_density(tmp_path / "nope.csv")


class TestRenderers:
    def test_profile_overlay_inset_window(self, bundle, tmp_path):
        out = tmp_path / "fig.png"
        spec = FigureSpec(kind="profile-overlay", inputs={
            "curve": bundle["curve"], "density": bundle["density"],
            "report": bundle["report"],
        })
        fig = render(spec, out)
        assert out.exists() and out.stat().st_size > 0
        inset = fig.axes[0].child_axes[0]
        assert inset.get_xlim() == (0.0, pytest.approx(0.15))  # 3 * r_c

    def test_identical_curves_render(self, bundle, tmp_path):
        # truth == learned is fine; curves coincide
        r, t, _ = read_profile_curve(bundle["curve"])
        same = bundle["dir"] / "same.csv"
        same.write_text(
            "r,phi_true,phi_learned\n"
            + "\n".join(f"{a:.17g},{b:.17g},{b:.17g}" for a, b in zip(r, t)) + "\n"
        )
        code = main(["profile-overlay", "--curve", str(same),
                     "--density", str(bundle["density"]),
                     "--report", str(bundle["report"]),
                     "--out", str(tmp_path / "same.png")])
        assert code == 0

    def test_trajectory_fan_uses_every_frame(self, bundle, tmp_path):
        out = tmp_path / "fan.png"
        fig = render(FigureSpec(kind="trajectory-fan", inputs={"traj": bundle["traj"]}), out)
        offsets = fig.axes[0].collections[0].get_offsets()
        assert offsets.shape[0] == 5 * 6  # (L+1) * N points
        assert out.exists()

    def test_trajectory_fan_two_panels(self, bundle, tmp_path):
        out = tmp_path / "fan2.png"
        fig = render(
            FigureSpec(kind="trajectory-fan",
                       inputs={"traj": bundle["traj"], "traj2": bundle["traj"]}),
            out,
        )
        titles = [ax.get_title() for ax in fig.axes]
        assert "learned" in titles and "true" in titles

    def test_adaptive_compare(self, bundle, tmp_path):
        out = tmp_path / "cmp.png"
        fig = render(FigureSpec(kind="adaptive-compare", inputs={
            "model_adaptive": bundle["model_a"],
            "model_uniform": bundle["model_u"],
            "density": bundle["density"],
            "curve": bundle["curve"],
        }), out)
        assert out.exists()
        titles = " ".join(ax.get_title() for ax in fig.axes)
        assert "adaptive" in titles and "uniform" in titles

    def test_unknown_kind_rejected(self):
        with pytest.raises(SchemaError):
            FigureSpec(kind="sparkline")


class TestCli:
    def test_exit_codes(self, bundle, tmp_path):
        ok = main(["trajectory-fan", "--traj", str(bundle["traj"]),
                   "--out", str(tmp_path / "a.png")])
        assert ok == 0
        missing = main(["trajectory-fan", "--traj", str(tmp_path / "no.csv"),
                        "--out", str(tmp_path / "b.png")])
        assert missing == 4
        bad = tmp_path / "bad.csv"
        bad.write_text("wrong,header\n1,2\n")
        schema = main(["trajectory-fan", "--traj", str(bad),
                       "--out", str(tmp_path / "c.png")])
        assert schema == 2

    def test_rerun_same_series(self, bundle, tmp_path):
        # rerunning produces identical data series (axes contents), though
        # the image encoding may differ
        spec = FigureSpec(kind="profile-overlay", inputs={
            "curve": bundle["curve"], "density": bundle["density"],
            "report": bundle["report"],
        })
        f1 = render(spec, tmp_path / "r1.png")
        f2 = render(spec, tmp_path / "r2.png")
        l1 = f1.axes[0].lines[0].get_ydata()
        l2 = f2.axes[0].lines[0].get_ydata()
        assert np.array_equal(l1, l2)
