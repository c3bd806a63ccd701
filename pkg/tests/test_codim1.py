import numpy as np
import pytest

from sipdyn.codim1 import (
    HOPF,
    SADDLE_NODE,
    TRANSCRITICAL,
    NotAHopfPointError,
    first_lyapunov,
    sweep,
    transversality_report,
)
from sipdyn.equilibria import E2_PREDATOR_FREE, interior_equilibria
from sipdyn.model import jacobian
from sipdyn.numerics import eig3


@pytest.fixture(scope="module")
def L_sweep():
    from conftest import BASELINE
    from sipdyn.model import Parameters

    base = Parameters(**BASELINE)
    branches, events = sweep(base, "L", -1.0, 1.0, 2001)
    return base, branches, events


def events_of(events, kind):
    return [ev for ev in events if ev.kind == kind]


class TestSweepValidation:
    def test_unknown_parameter(self, base):
        with pytest.raises(ValueError):
            sweep(base, "q0", 0.0, 1.0, 10)

    def test_empty_range(self, base):
        with pytest.raises(ValueError):
            sweep(base, "L", 1.0, -1.0, 10)

    def test_minimum_grid(self, base):
        with pytest.raises(ValueError):
            sweep(base, "L", -1.0, 1.0, 2)


class TestAlleeSweepEvents:
    def test_saddle_node_location(self, L_sweep):
        _, _, events = L_sweep
        sns = events_of(events, SADDLE_NODE)
        assert len(sns) == 1
        sn = sns[0]
        assert sn.value == pytest.approx(0.2396, abs=5e-3)
        assert np.allclose(sn.equilibrium.point, (1.8642, 0.9760, 1.8254), atol=1e-2)
        assert abs(sn.diagnostics["omega3"]) < 1e-6

    def test_hopf_location(self, L_sweep):
        _, _, events = L_sweep
        hs = events_of(events, HOPF)
        assert len(hs) == 1
        h = hs[0]
        assert h.value == pytest.approx(0.2184, abs=5e-3)
        assert np.allclose(h.equilibrium.point, (1.6746, 1.0295, 1.5817), atol=1e-2)
        c = h.diagnostics
        assert abs(c["hopf_margin"]) < 1e-6 and c["omega2"] > 0.0

    def test_transcritical_location(self, L_sweep):
        _, _, events = L_sweep
        tcs = events_of(events, TRANSCRITICAL)
        main = [ev for ev in tcs if abs(ev.value + 0.4312) < 5e-3]
        assert len(main) == 1
        tc = main[0]
        assert np.allclose(tc.equilibrium.point, (0.4444, 1.5, 0.0), atol=1e-3)
        assert abs(tc.diagnostics["zero_eigenvalue"]) < 1e-6

    def test_no_events_on_quiet_subinterval(self, base):
        _, events = sweep(base, "L", -0.3, -0.2, 101)
        assert events == []

    def test_det_changes_sign_across_fold(self, L_sweep):
        # walking through the fold along the branch path (upper equilibrium
        # to lower), the determinant crosses zero: the merging pair has
        # opposite det signs just before the collision
        base, _, events = L_sweep
        sn = events_of(events, SADDLE_NODE)[0]
        p = base.replace(L=sn.value - 1e-3)
        eqs = sorted(interior_equilibria(p), key=lambda e: e.point.S)
        near = [e for e in eqs if abs(e.point.S - sn.equilibrium.point.S) < 0.5]
        assert len(near) == 2
        dets = [np.linalg.det(jacobian(e.point, p)) for e in near]
        assert dets[0] * dets[1] < 0.0
        # and the pair is gone on the other side
        p_after = base.replace(L=sn.value + 1e-3)
        assert not any(
            abs(e.point.S - sn.equilibrium.point.S) < 0.2 for e in interior_equilibria(p_after)
        )

    def test_pair_real_part_changes_sign_across_hopf(self, L_sweep):
        base, _, events = L_sweep
        h = events_of(events, HOPF)[0]
        res = []
        for dL in (-1e-3, 1e-3):
            p = base.replace(L=h.value + dL)
            eqs = interior_equilibria(p)
            eq = min(eqs, key=lambda e: np.max(np.abs(np.asarray(e.point) - h.equilibrium.point)))
            pair = [z for z in eig3(jacobian(eq.point, p)) if z.imag > 1e-6]
            assert pair and pair[0].imag > 1e-4
            res.append(pair[0].real)
        assert res[0] * res[1] < 0.0

    def test_predator_invasion_product_vanishes_at_transcritical(self, L_sweep):
        # on the predator-free branch the zero eigenvalue comes from either
        # the invasion entry C33 or the quadratic block product C12*C21
        base, _, events = L_sweep
        for tc in events_of(events, TRANSCRITICAL):
            if tc.diagnostics.get("branch") != E2_PREDATOR_FREE:
                continue
            J = jacobian(tc.equilibrium.point, base.replace(L=tc.value))
            assert min(abs(J[2, 2]), abs(J[0, 1] * J[1, 0])) < 1e-6

    def test_stability_flips_only_at_events(self, L_sweep):
        _, branches, events = L_sweep
        ev_values = [ev.value for ev in events]
        for b in branches:
            verdicts = [None if r is None else r.verdict for r in b.reports]
            for i in range(len(verdicts) - 1):
                a, c = verdicts[i], verdicts[i + 1]
                if a is None or c is None or a == c or "marginal" in (a, c):
                    continue
                lo, hi = b.values[i], b.values[i + 1]
                assert any(lo - 1e-6 <= v <= hi + 1e-6 for v in ev_values), (
                    f"verdict flip on {b.kind} in [{lo}, {hi}] without an event"
                )

    def test_interior_count_changes_only_at_events(self, L_sweep):
        base, _, events = L_sweep
        ev_values = sorted(ev.value for ev in events)
        grid = np.linspace(-1.0, 1.0, 401)
        counts = [len(interior_equilibria(base.replace(L=float(v)))) for v in grid]
        for i in range(len(grid) - 1):
            if counts[i] != counts[i + 1]:
                assert any(grid[i] - 1e-9 <= v <= grid[i + 1] + 1e-9 for v in ev_values)


class TestAggregationSweepEvents:
    def test_transcritical_at_critical_aggregation(self, base):
        _, events = sweep(base, "r", 0.05, 0.95, 2001)
        tcs = events_of(events, TRANSCRITICAL)
        main = [ev for ev in tcs if abs(ev.value - 0.7641) < 5e-3]
        assert len(main) == 1
        assert np.allclose(main[0].equilibrium.point, (3.6099, 0.0, 4.0698), atol=1e-2)

    def test_branch_residuals(self, base):
        from sipdyn.model import rhs

        branches, _ = sweep(base, "r", 0.3, 0.9, 61)
        checked = 0
        for b in branches:
            for v, eq in zip(b.values, b.equilibria):
                if not all(np.isfinite(eq.point)) or eq.point.S < 0:
                    continue
                res = max(abs(w) for w in rhs(eq.point, base.replace(r=float(v))))
                assert res < 1e-8
                checked += 1
        assert checked > 100


class TestFirstLyapunov:
    def test_hopf_point_is_supercritical(self, L_sweep):
        # a periodic orbit surrounds the focus on its pair-unstable side
        # (amplitude ~ sqrt of the parameter distance), so the cubic
        # normal-form term is contracting: negative coefficient
        base, _, events = L_sweep
        h = events_of(events, HOPF)[0]
        l1 = first_lyapunov(h.equilibrium, base.replace(L=h.value))
        assert np.isfinite(l1)
        assert l1 < 0.0

    def test_sign_invariant_under_eigenvector_rescaling(self, L_sweep):
        # the magnitude scales with the eigenvector normalization; the sign
        # is the contract and must not move
        base, _, events = L_sweep
        h = events_of(events, HOPF)[0]
        p = base.replace(L=h.value)
        vals = [first_lyapunov(h.equilibrium, p, _q_scale=s) for s in (1.0, 0.37, 12.0)]
        assert all(np.sign(v) == np.sign(vals[0]) for v in vals)

    def test_rejects_non_hopf_point(self, base):
        eq = interior_equilibria(base)[0]  # stable focus, pair well off the axis
        with pytest.raises(NotAHopfPointError):
            first_lyapunov(eq, base)


class TestTransversality:
    def test_saddle_node_quantities_nonzero(self, L_sweep):
        base, _, events = L_sweep
        sn = events_of(events, SADDLE_NODE)[0]
        rep = transversality_report(sn, base)
        assert rep["v_dot_w_p_nonzero"] and rep["v_dot_d2w_uu_nonzero"]

    def test_hopf_crossing_speed(self, L_sweep):
        base, _, events = L_sweep
        h = events_of(events, HOPF)[0]
        rep = transversality_report(h, base)
        assert rep["crossing_speed_nonzero"]
        # independent characteristic-coefficient route must agree
        assert rep["crossing_speed"] == pytest.approx(
            rep["crossing_speed_from_coefficients"], rel=1e-4
        )

    def test_transcritical_first_condition_vanishes(self, L_sweep):
        base, _, events = L_sweep
        tc = [ev for ev in events_of(events, TRANSCRITICAL) if abs(ev.value + 0.4312) < 5e-3][0]
        rep = transversality_report(tc, base)
        assert rep["x2_dot_w_p_zero"]
        assert abs(rep["zero_eigenvalue_crossing_speed"]) > 1e-6
