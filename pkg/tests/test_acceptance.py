"""End-to-end acceptance gate.

One test per criterion; each prints a single PASS/FAIL line (run with -s to
see them on success).  Criteria cover the closed-form value oracle, half-line
classification against the LP game value, the two one-sided schemes agreeing,
exact replay of the continuous strategy, the approach/exclude dichotomy under
best response, transport duality certificates, the lifted Hamiltonian
identities, reduction soundness against a brute-force oracle, greedy
approach in Wasserstein distance, and byte-level CLI reproducibility.
"""

import json
import time
from dataclasses import replace
from itertools import product

import numpy as np

from approachability.cli import main, provenance_to_argv, read_provenance
from approachability.games import Ball, HalfSpace, MixedAction, Polytope, VectorGame, payoff
from approachability.grids import simplex_grid
from approachability.hjb import (
    APPROACHABLE,
    EXCLUDABLE,
    SchemeConfig,
    classify,
    solve_value,
    value_at_zero,
)
from approachability.lifted import (
    PotentialClimber,
    PureColumn,
    StationaryLifted,
    restrict,
    restriction_weight,
    hamiltonian_inequality_residual,
    run_wsim,
    substituted_matrix,
    w_hamiltonian,
)
from approachability.lp import matrix_game_value
from approachability.monitoring import SignalStructure, build_etilde, etilde_membership
from approachability.simulate import BestResponseAdversary, run
from approachability.synthesis import (
    PiecewiseConstantControl,
    RepeatedStrategy,
    build_nadc,
    replay_gap_bound,
)
from approachability.transport import DiscreteMeasure, w2

EQUALIZER = VectorGame(np.array([[[3.0], [1.0]], [[0.0], [2.0]]]))
MATCHING_PENNIES = np.array([[1.0, -1.0], [-1.0, 1.0]])


def report(num: int, label: str, ok: bool, detail: str = "") -> None:
    tail = f" ({detail})" if detail else ""
    print(f"criterion {num:2d} [{'PASS' if ok else 'FAIL'}] {label}{tail}")
    assert ok, f"criterion {num}: {label}{tail}"


def scalar_game(matrix: np.ndarray) -> VectorGame:
    return VectorGame(np.asarray(matrix, dtype=float)[:, :, None])


def test_criterion_01_closed_form_value():
    t0 = time.perf_counter()
    game = VectorGame(np.array([[[1.0]]]))
    cfg = SchemeConfig(
        s0=0.05,
        steps=100,
        g_nodes=(101,),
        action_resolution=2,
        box=(np.array([0.0]), np.array([2.0])),
    )
    vg = solve_value(game, Ball(np.array([1.0]), 0.0), cfg)
    g = vg.node_points()[:, 0]
    err = 0.0
    for k, s in enumerate(vg.s_values):
        err = max(err, float(np.max(np.abs(vg.values[k] - s * np.abs(g - 1.0)))))
    elapsed = time.perf_counter() - t0
    report(
        1,
        "closed-form value max node error <= 0.02, < 10 s",
        err <= 0.02 and elapsed < 10.0,
        f"err={err:.4f}, {elapsed:.1f}s",
    )


def test_criterion_02_halfline_classification():
    t0 = time.perf_counter()
    rng = np.random.default_rng(7)
    cfg = SchemeConfig(s0=0.02, steps=49, g_nodes=(61,), action_resolution=13)
    worst_err, verdicts_ok = 0.0, True
    for _ in range(20):
        m = rng.uniform(-1, 1, (3, 3))
        game = scalar_game(m)
        vstar = matrix_game_value(m).value
        for c in (vstar - 0.5, vstar + 0.5):
            res = classify(game, HalfSpace(np.array([1.0]), c), cfg, tol=0.25)
            worst_err = max(worst_err, abs(res["estimate"] - max(0.0, vstar - c)))
            expected = EXCLUDABLE if vstar > c else APPROACHABLE
            verdicts_ok = verdicts_ok and res["verdict"] == expected
    elapsed = time.perf_counter() - t0
    report(
        2,
        "half-line estimates within 0.05, 40/40 verdicts, < 120 s",
        worst_err <= 0.05 and verdicts_ok and elapsed < 120.0,
        f"err={worst_err:.4f}, {elapsed:.1f}s",
    )


def test_criterion_03_one_sided_scheme_gap():
    rng = np.random.default_rng(11)
    games = [MATCHING_PENNIES] + [rng.uniform(-1, 1, (2, 2)) for _ in range(5)]
    # suite-level sup-norm gap at the coarse scheme, then everything doubled
    gaps = {}
    for res, steps, nodes in ((33, 19, 41), (65, 39, 81)):
        worst = 0.0
        for m in games:
            game = scalar_game(m)
            target = Ball(np.zeros(1), 0.0)
            cfg = SchemeConfig(s0=0.05, steps=steps, g_nodes=(nodes,), action_resolution=res)
            lo = solve_value(game, target, cfg)
            hi = solve_value(game, target, replace(cfg, order="maxmin"))
            worst = max(worst, float(np.max(np.abs(lo.values - hi.values))))
        gaps[res] = worst
    report(
        3,
        "one-sided scheme gap <= 0.05 and shrinks >= 30% when doubling resolution",
        gaps[33] <= 0.05 and gaps[65] <= 0.7 * gaps[33] + 1e-6,
        f"gap {gaps[33]:.4f} -> {gaps[65]:.4f}",
    )


def test_criterion_04_replay_equality():
    rng = np.random.default_rng(13)
    equal_ok, bound_ok = True, True
    for _ in range(50):
        a, b, d = int(rng.integers(2, 4)), int(rng.integers(2, 4)), int(rng.integers(1, 3))
        game = VectorGame(rng.uniform(-1, 1, (a, b, d)))
        target = Ball(np.zeros(d), 0.5)
        cfg = SchemeConfig(s0=0.1, steps=9, g_nodes=(15,) * d, action_resolution=5)
        vg = solve_value(game, target, cfg)
        N = int(rng.integers(5, 11))
        k = int(rng.integers(2, 6))
        n = k * N + int(rng.integers(0, N))
        strat = RepeatedStrategy(build_nadc(vg, N), n)
        y_stages = rng.dirichlet(np.ones(b), size=n)
        history = []
        for m in range(n):
            strat.act(history)
            history.append(MixedAction(y_stages[m]))
        strat.record(history)
        _, endpoint = strat.base.respond(
            PiecewiseConstantControl.from_stages(y_stages[: k * N])
        )
        equal_ok = equal_ok and np.max(np.abs(strat.average_after(k * N) - endpoint)) <= 1e-12
        gap = np.linalg.norm(strat.average_after(n) - endpoint)
        bound_ok = bound_ok and gap <= replay_gap_bound(strat) + 1e-12
    report(4, "block replay exact to 1e-12 and tail within 2*kappa*N/n", equal_ok and bound_ok)


def _dichotomy_run(c: float, n: int):
    target = HalfSpace(np.array([1.0]), c)
    cfg = SchemeConfig(s0=0.05, steps=19, g_nodes=(31,), action_resolution=9)
    vg = solve_value(EQUALIZER, target, cfg)
    vg2 = solve_value(EQUALIZER, target, replace(cfg, order="maxmin"))
    strat = RepeatedStrategy(build_nadc(vg, 20), n)
    traj = run(strat, BestResponseAdversary(vg2, n), EQUALIZER, target, n)
    return float(traj.distances[-1])


def test_criterion_05_dichotomy_simulation():
    n = 5000
    t0 = time.perf_counter()
    d_app = _dichotomy_run(2.0, n)
    t_app = time.perf_counter() - t0
    t0 = time.perf_counter()
    d_exc = _dichotomy_run(1.0, n)
    t_exc = time.perf_counter() - t0
    report(
        5,
        "best-response dichotomy: approach <= 0.1, exclude >= 0.25, < 1 min each",
        d_app <= 0.1 and d_exc >= 0.25 and t_app < 60.0 and t_exc < 60.0,
        f"d_app={d_app:.4f}, d_exc={d_exc:.4f}, {t_app:.0f}s/{t_exc:.0f}s",
    )


def test_criterion_06_transport_duality():
    rng = np.random.default_rng(23)
    gap_ok = feas_ok = slack_ok = lip_ok = True
    for _ in range(100):
        n1, n2 = int(rng.integers(1, 51)), int(rng.integers(1, 51))
        mu = DiscreteMeasure(rng.uniform(0, 1, (n1, 2)), rng.dirichlet(np.ones(n1)))
        nu = DiscreteMeasure(rng.uniform(0, 1, (n2, 2)), rng.dirichlet(np.ones(n2)))
        res = w2(mu, nu)
        cost_matrix = np.sum(
            (mu.points[:, None, :] - nu.points[None, :, :]) ** 2, axis=2
        )
        dual_value = float(res.phi @ mu.weights + res.phistar @ nu.weights)
        gap_ok = gap_ok and abs(res.cost - dual_value) <= 1e-7
        violation = res.phi[:, None] + res.phistar[None, :] - cost_matrix
        feas_ok = feas_ok and float(np.max(violation)) <= 1e-9
        slack = np.where(res.plan > 1e-12, -violation, 0.0)
        slack_ok = slack_ok and float(np.max(slack)) <= 1e-8
        # potentials inherit the cost's Lipschitz constant 2 * diameter
        dist = np.linalg.norm(mu.points[:, None, :] - mu.points[None, :, :], axis=2)
        lip = np.abs(res.phi[:, None] - res.phi[None, :]) - 2.0 * np.sqrt(2.0) * dist
        lip_ok = lip_ok and float(np.max(lip)) <= 1e-9
    report(
        6,
        "transport duality gap, feasibility, slackness, Lipschitz certificates",
        gap_ok and feas_ok and slack_ok and lip_ok,
    )


def test_criterion_07_lifted_hamiltonian():
    rng = np.random.default_rng(31)
    grid = np.array([[r, c] for r in np.linspace(0, 1, 3) for c in np.linspace(0, 1, 3)])
    lam = restriction_weight(0.2)
    gap_ok = homog_ok = residual_ok = True
    for _ in range(100):
        phi = rng.uniform(-1, 1, (3, 3))
        sub = substituted_matrix(phi, lam, lam)
        gap = abs(matrix_game_value(sub).value + matrix_game_value(-sub.T).value)
        gap_ok = gap_ok and gap <= 1e-8
        mu_w = restrict(rng.dirichlet(np.ones(9)), lam)
        h1 = w_hamiltonian(0.5, mu_w.reshape(3, 3), 3.0 * phi, lam, lam)
        h3 = 3.0 * w_hamiltonian(0.5, mu_w.reshape(3, 3), phi, lam, lam)
        homog_ok = homog_ok and abs(h1 - h3) <= 1e-9 * (1 + abs(h3))
        nu_w = restrict(rng.dirichlet(np.ones(9)), lam)
        s, t = rng.uniform(0.3, 0.9, 2)
        res = hamiltonian_inequality_residual(
            t,
            DiscreteMeasure(grid, nu_w),
            s,
            DiscreteMeasure(grid, mu_w),
            (3, 3),
            0.2,
        )
        residual_ok = residual_ok and res >= -1e-6
    report(
        7,
        "lifted Hamiltonian: one-sided gap, homogeneity, inequality residual",
        gap_ok and homog_ok and residual_ok,
    )


def _minkowski_member(et, q, target, tol=1e-9):
    active = [i for i in range(len(et)) if q[i] > tol]
    for choice in product(*[range(len(et.payoff_sets[i])) for i in active]):
        point = sum(q[i] * et.payoff_sets[i][c] for i, c in zip(active, choice))
        if np.any(target.normals @ point > target.offsets + tol):
            return False
    return True


def test_criterion_08_reduction_soundness():
    rng = np.random.default_rng(37)
    mismatches = 0
    for trial in range(200):
        game = VectorGame(rng.uniform(-1, 1, (2, 3, 2)))
        angles = np.linspace(0, 2 * np.pi, 5, endpoint=False) + rng.uniform(0, 1)
        normals = np.stack([np.cos(angles), np.sin(angles)], axis=1)
        offsets = normals @ rng.uniform(-0.5, 0.5, 2) + rng.uniform(0.3, 1.2, 5)
        target = Polytope(normals=normals, offsets=offsets)
        if trial % 2 == 0:
            signals = SignalStructure(np.array([[0.0, 0.5, 1.0]]))
            grid_x = [MixedAction(rng.dirichlet(np.ones(2)))]
        else:
            game = VectorGame(rng.uniform(-1, 1, (2, 2, 2)))
            signals = SignalStructure.full_monitoring(2)
            grid_x = [MixedAction.pure(2, 0), MixedAction(rng.dirichlet(np.ones(2)))]
        et = build_etilde(game, target, grid_x, signals)
        q = rng.dirichlet(np.ones(len(et)))
        measure = DiscreteMeasure(et.grid_points, q)
        if etilde_membership(et, measure, tol=1e-9) != _minkowski_member(et, q, target):
            mismatches += 1
    report(8, "compatible-set membership matches the vertex oracle, 200/200", mismatches == 0)


def test_criterion_09_wasserstein_greedy():
    target = Polytope(normals=np.array([[1.0]]), offsets=np.array([2.0]))
    grid_x = [MixedAction(w) for w in simplex_grid(2, 5)]
    et = build_etilde(EQUALIZER, target, grid_x, SignalStructure.full_monitoring(2))
    adversaries = {
        "uniform": StationaryLifted(np.array([0.5, 0.5])),
        "climber": PotentialClimber(),
        "column0": PureColumn(2, 0),
    }
    far_ok, trend_ok, finals = True, True, []
    for adversary in adversaries.values():
        traj, _ = run_wsim(et, adversary, 2000, 0.2)
        finals.append(float(traj.w2dist[-1]))
        far_ok = far_ok and traj.w2dist[-1] <= 0.1
        trend_ok = trend_ok and traj.w2dist[1999] <= traj.w2dist[499] + 1e-9
    report(
        9,
        "greedy lifted play: W2 <= 0.1 at n=2000, non-increasing from n=500",
        far_ok and trend_ok,
        "final W2 " + ", ".join(f"{f:.4f}" for f in finals),
    )


def _cli_roundtrip(argv, out):
    assert main(argv) == 0
    keep = lambda line: not (line.startswith("# generated") or '"generated"' in line)
    first = [line for line in out.read_text().splitlines() if keep(line)]
    rebuilt = provenance_to_argv(read_provenance(str(out)))
    assert main(rebuilt) == 0
    second = [line for line in out.read_text().splitlines() if keep(line)]
    return first == second


def test_criterion_10_cli_reproducibility(tmp_path):
    rng = np.random.default_rng(41)

    def write(name, doc):
        path = tmp_path / name
        path.write_text(json.dumps(doc))
        return str(path)

    game = write("game.json", {"payoffs": [[3.0, 1.0], [0.0, 2.0]]})
    target = write("target.json", {"type": "halfspace", "normal": [1.0], "offset": 2.0})
    poly = write("poly.json", {"type": "polytope", "normals": [[1.0]], "offsets": [2.0]})
    signals = write("signals.json", {"matrix": [[1.0, 0.0], [0.0, 1.0]]})
    ok = True
    for i in range(10):
        out = tmp_path / f"out{i}.csv"
        steps = int(rng.integers(9, 16))
        nodes = int(rng.integers(11, 31))
        kind = i % 5
        if kind == 0:
            argv = ["value", "--game", game, "--target", target, "--s0", "0.1",
                    "--sgrid", str(steps), "--ggrid", str(nodes), "--actions", "5",
                    "--out", str(out)]
        elif kind == 1:
            argv = ["classify", "--game", game, "--target", target, "--s0", "0.1",
                    "--sgrid", str(steps), "--ggrid", str(nodes), "--actions", "5",
                    "--tol", str(round(rng.uniform(0.1, 0.4), 3)), "--out", str(out)]
        elif kind == 2:
            argv = ["synthesize", "--game", game, "--target", target, "--s0", "0.1",
                    "--sgrid", str(steps), "--ggrid", str(nodes), "--actions", "5",
                    "--N", "5", "--out", str(out)]
        elif kind == 3:
            n_pts = int(rng.integers(2, 6))
            mu = write(f"mu{i}.json", {
                "points": rng.uniform(0, 1, (n_pts, 2)).tolist(),
                "weights": rng.dirichlet(np.ones(n_pts)).tolist(),
            })
            nu = write(f"nu{i}.json", {
                "points": rng.uniform(0, 1, (n_pts, 2)).tolist(),
                "weights": rng.dirichlet(np.ones(n_pts)).tolist(),
            })
            argv = ["ot", "--mu", mu, "--nu", nu, "--out", str(out)]
        else:
            argv = ["wsim", "--game", game, "--target", poly, "--signals", signals,
                    "--actions", "3", "--n", str(int(rng.integers(3, 8))),
                    "--delta", "0.3", "--out", str(out)]
        ok = ok and _cli_roundtrip(argv, out)
    report(10, "10 randomized CLI outputs regenerate byte-identically", ok)
