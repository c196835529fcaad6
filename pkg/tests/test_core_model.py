import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chargeparity.core_model import (
    CoupledSystem,
    CutoffError,
    DegeneracyError,
    QubitParams,
    charge_dispersion_slope,
    cos_half_phi_element,
    dressed_resonator_frequency,
    eigenlevels,
    epsilon0,
    parity_spectrum,
    spectrum_vs_ng,
    transition_frequency,
)
from chargeparity.io import device_by_id, load_device_tables

S1Q1 = QubitParams(4.67e9, 1.40e9)


def pair_basis(ej, ec, ng, ncut=40):
    """Dense Cooper-pair-basis diagonalisation of both parity sectors.

    Even: 4 E_C (n - n_g)^2; odd: 4 E_C (n - n_g - 1/2)^2; -E_J cos(phi)
    hops n by one pair. Returns (levels_even, vec_even, levels_odd, vec_odd)
    with n running over [-ncut, ncut].
    """
    n = np.arange(-ncut, ncut + 1)
    hop = -0.5 * ej * (np.eye(n.size, k=1) + np.eye(n.size, k=-1))
    he = np.diag(4 * ec * (n - ng) ** 2) + hop
    ho = np.diag(4 * ec * (n - ng - 0.5) ** 2) + hop
    we, ve = np.linalg.eigh(he)
    wo, vo = np.linalg.eigh(ho)
    return we, ve[:, 0], wo, vo[:, 0]


def pair_basis_c0(ej, ec, ng, ncut=40):
    # electron numbers: even sector k = 2n, odd sector k = 2m - 1
    _, ge, _, go = pair_basis(ej, ec, ng, ncut)
    # cos(phi/2) = (|k><k+1| + h.c.)/2 ; even n touches odd m = n and m = n + 1
    amp = 0.5 * (ge @ go + ge[:-1] @ go[1:])
    return abs(amp)


class TestEigenlevels:
    def test_charging_parabola(self):
        lv = eigenlevels(QubitParams(0.0, 1.0e9), "even", k=2)
        assert lv[0] == pytest.approx(0.0, abs=1e-3)
        assert lv[1] - lv[0] == pytest.approx(4.0e9, rel=1e-12)

    def test_sorted_and_count(self):
        lv = eigenlevels(S1Q1, "odd", k=6)
        assert len(lv) == 6
        assert all(a < b for a, b in zip(lv, lv[1:]))

    def test_bad_parity(self):
        with pytest.raises(ValueError):
            eigenlevels(S1Q1, "neutral")

    def test_too_many_levels(self):
        with pytest.raises(ValueError):
            eigenlevels(replace(S1Q1, cutoff=10), "even", k=19)

    def test_params_validation(self):
        with pytest.raises(ValueError):
            QubitParams(-1.0, 1e9)
        with pytest.raises(ValueError):
            QubitParams(1e9, 0.0)
        with pytest.raises(ValueError):
            QubitParams(1e9, 1e9, cutoff=5)

    def test_cutoff_cap(self):
        # bandwidth of the charge basis cannot hold an absurd E_J/E_C
        with pytest.raises(CutoffError):
            eigenlevels(QubitParams(1e18, 1e6), "even")

    def test_parity_spectrum(self):
        sp = parity_spectrum(S1Q1, k=3)
        assert len(sp.even_levels) == len(sp.odd_levels) == 3
        assert sp.ng == 0.0


class TestTableValues:
    def test_s1q1_epsilon0(self):
        assert epsilon0(S1Q1) / 1e9 == pytest.approx(0.238, rel=0.01)

    def test_s1q2_epsilon0(self):
        assert epsilon0(QubitParams(4.27e9, 1.48e9)) / 1e9 == pytest.approx(0.319, rel=0.01)

    def test_s4q3_epsilon0(self):
        val = epsilon0(QubitParams(12.25e9, 0.44e9)) / 1e9
        assert 2.18e-5 / 1.5 < val < 2.18e-5 * 1.5

    def test_s5q3_epsilon0(self):
        # table keeps two significant digits; the computed value is 1.56e-6 GHz
        val = epsilon0(QubitParams(14.66e9, 0.37e9)) / 1e9
        assert 1.6e-6 / 1.5 < val < 1.6e-6 * 1.5

    def test_charge_limit(self):
        ec = 1.0e9
        assert epsilon0(QubitParams(1e-4 * ec, ec)) == pytest.approx(ec, rel=1e-3)

    def test_s1q1_transitions(self):
        assert transition_frequency(S1Q1, "even") / 1e9 == pytest.approx(6.833, rel=0.01)
        assert transition_frequency(S1Q1, "odd") / 1e9 == pytest.approx(4.473, rel=0.01)

    @pytest.mark.parametrize("ej,ec,c0sq", [(4.67, 1.40, 0.775), (12.25, 0.44, 0.931), (2.35, 1.29, 0.691)])
    def test_c0_squared(self, ej, ec, c0sq):
        assert cos_half_phi_element(QubitParams(ej * 1e9, ec * 1e9)) ** 2 == pytest.approx(c0sq, rel=0.02)

    def test_c0sq_increases_with_ratio(self):
        recs = [r for r in load_device_tables() if r.c0sq is not None]
        recs.sort(key=lambda r: r.ej_hz / r.ec_hz)
        vals = [cos_half_phi_element(QubitParams(r.ej_hz, r.ec_hz)) ** 2 for r in recs]
        assert all(a < b for a, b in zip(vals, vals[1:]))
        assert vals[0] == pytest.approx(0.691, rel=0.02)
        assert vals[-1] == pytest.approx(0.942, rel=0.02)

    def test_degenerate_odd_ground(self):
        with pytest.raises(DegeneracyError):
            cos_half_phi_element(QubitParams(0.0, 1e9))


class TestSymmetries:
    def test_half_shift_exchanges_parities(self):
        q = QubitParams(3.1e9, 1.2e9, ng=0.5)
        ref = transition_frequency(QubitParams(3.1e9, 1.2e9), "odd")
        assert transition_frequency(q, "even") == pytest.approx(ref, rel=1e-12)

    @settings(max_examples=40, deadline=None)
    @given(ratio=st.floats(0.2, 50), ng=st.floats(-1, 1), ec=st.floats(0.2e9, 2e9))
    def test_periodicity(self, ratio, ng, ec):
        a = QubitParams(ratio * ec, ec, ng=ng)
        b = replace(a, ng=ng + 1)
        for p in ("even", "odd"):
            assert eigenlevels(b, p, 3) == pytest.approx(eigenlevels(a, p, 3), rel=1e-9, abs=1e-9 * ec)

    @settings(max_examples=40, deadline=None)
    @given(ratio=st.floats(0.2, 50), ng=st.floats(-1, 1), ec=st.floats(0.2e9, 2e9))
    def test_one_electron_shift(self, ratio, ng, ec):
        a = QubitParams(ratio * ec, ec, ng=ng)
        b = replace(a, ng=ng + 0.5)
        assert eigenlevels(b, "even", 3) == pytest.approx(eigenlevels(a, "odd", 3), rel=1e-9, abs=1e-9 * ec)

    @settings(max_examples=40, deadline=None)
    @given(ratio=st.floats(0.2, 50), ec=st.floats(0.2e9, 2e9))
    def test_cutoff_convergence(self, ratio, ec):
        a = QubitParams(ratio * ec, ec, cutoff=60)
        b = replace(a, cutoff=120)
        assert epsilon0(b) == pytest.approx(epsilon0(a), rel=1e-8)
        assert cos_half_phi_element(b) == pytest.approx(cos_half_phi_element(a), rel=1e-8)

    @settings(max_examples=40, deadline=None)
    @given(ratio=st.floats(0.05, 50), ng=st.floats(-0.5, 0.5), ec=st.floats(0.2e9, 2e9))
    def test_c0_range(self, ratio, ng, ec):
        q = QubitParams(ratio * ec, ec, ng=ng)
        try:
            c0 = cos_half_phi_element(q)
        except DegeneracyError:
            return
        assert 0.0 <= c0 <= 1.0


class TestPairBasisOracle:
    @settings(max_examples=40, deadline=None)
    @given(ratio=st.floats(0.3, 20), ng=st.floats(-0.45, 0.45), ec=st.floats(0.3e9, 2e9))
    def test_epsilon0(self, ratio, ng, ec):
        ej = ratio * ec
        we, _, wo, _ = pair_basis(ej, ec, ng)
        ref = abs(wo[0] - we[0])
        got = epsilon0(QubitParams(ej, ec, ng=ng))
        # relative to the gap, with an absolute floor set by the level scale
        assert got == pytest.approx(ref, rel=1e-9, abs=1e-12 * (ej + ec))

    @pytest.mark.parametrize("ej,ec", [(4.67e9, 1.40e9), (2.35e9, 1.29e9), (12.25e9, 0.44e9)])
    def test_c0(self, ej, ec):
        assert cos_half_phi_element(QubitParams(ej, ec)) == pytest.approx(pair_basis_c0(ej, ec, 0.0), rel=1e-9)

    def test_transition(self):
        we, _, wo, _ = pair_basis(4.67e9, 1.40e9, 0.0)
        assert transition_frequency(S1Q1, "even") == pytest.approx(we[1] - we[0], rel=1e-11)
        assert transition_frequency(S1Q1, "odd") == pytest.approx(wo[1] - wo[0], rel=1e-11)


class TestDispersionSlope:
    def test_zero_at_sweet_spot(self):
        assert charge_dispersion_slope(S1Q1, "even") == pytest.approx(0.0, abs=1e-3)

    @pytest.mark.parametrize("ng", [0.1, 0.23, 0.4])
    def test_antisymmetric(self, ng):
        a = charge_dispersion_slope(replace(S1Q1, ng=ng), "odd")
        b = charge_dispersion_slope(replace(S1Q1, ng=-ng), "odd")
        assert a == pytest.approx(-b, rel=1e-8)

    def test_secant_oracle(self):
        h = 1e-6
        up = transition_frequency(replace(S1Q1, ng=0.25 + h), "even")
        dn = transition_frequency(replace(S1Q1, ng=0.25 - h), "even")
        ref = (up - dn) / (2 * h)
        assert charge_dispersion_slope(replace(S1Q1, ng=0.25), "even") == pytest.approx(ref, rel=1e-6)


class TestDressedResonator:
    def test_decoupled(self):
        s = CoupledSystem(S1Q1, 0.0, 5.556e9)
        for p in ("even", "odd"):
            for q in "ge":
                assert dressed_resonator_frequency(s, p, q) == 5.556e9

    def test_ordering(self):
        s = CoupledSystem(S1Q1, 24.3e6, 5.556e9)
        assert dressed_resonator_frequency(s, "even", "g") < dressed_resonator_frequency(s, "odd", "g")

    def test_four_state_pattern(self):
        s = CoupledSystem(S1Q1, 24.3e6, 5.556e9)
        f = {(p, q): dressed_resonator_frequency(s, p, q) for p in ("even", "odd") for q in "ge"}
        assert abs(f["odd", "g"] - f["even", "e"]) < 0.2e6
        assert abs(f["even", "g"] - f["odd", "e"]) < 0.2e6
        # measured pairs 5.55650/5.55643 and 5.55551/5.55541 GHz
        assert f["odd", "g"] == pytest.approx(5.55650e9, abs=0.2e6)
        assert f["even", "g"] == pytest.approx(5.55551e9, abs=0.2e6)

    def test_degeneracy(self):
        w = transition_frequency(S1Q1, "even")
        s = CoupledSystem(S1Q1, 50e6, w + 10e6)
        with pytest.raises(DegeneracyError):
            dressed_resonator_frequency(s, "even", "g")

    def test_bad_state(self):
        with pytest.raises(ValueError):
            dressed_resonator_frequency(CoupledSystem(S1Q1, 24.3e6, 5.556e9), "even", "f")

    def test_two_level_oracle(self):
        # dressed resonator = difference of dressed JC levels in the one-excitation manifolds
        s = CoupledSystem(S1Q1, 24.3e6, 5.556e9)
        wq = transition_frequency(S1Q1, "odd")
        fr, g = 5.556e9, 24.3e6

        def manifold(n):
            # |g, n> and |e, n-1> block
            if n == 0:
                return np.array([0.0])
            h = np.array([[n * fr, g * math.sqrt(n)], [g * math.sqrt(n), (n - 1) * fr + wq]])
            return np.linalg.eigvalsh(h)

        e0 = manifold(0)[0]
        # ground-like state of manifold 1 is the one with the larger |g,1> weight
        lv1 = manifold(1)
        lv2 = manifold(2)
        # qubit below the resonator: |g,1> is the upper branch, |g,2> the upper of the 2-manifold
        f_g = lv1[1] - e0
        assert dressed_resonator_frequency(s, "odd", "g") == pytest.approx(f_g, rel=1e-12)
        # excited-state resonator: |e,1> (upper of manifold 2 minus |e,0> lower of manifold 1)
        f_e = lv2[0] - lv1[0]
        assert dressed_resonator_frequency(s, "odd", "e") == pytest.approx(f_e, rel=1e-12)


class TestSpectrumVsNg:
    def test_single_point(self):
        t = spectrum_vs_ng(S1Q1, [0.2])
        assert t.columns["even_0_1"][0] == transition_frequency(replace(S1Q1, ng=0.2), "even")

    def test_even_max_at_zero(self):
        q = QubitParams(3.0e9, 1.0e9)
        grid = np.linspace(-0.5, 0.5, 401)
        t = spectrum_vs_ng(q, grid, parities=("even",))
        assert grid[np.argmax(t.columns["even_0_1"])] == pytest.approx(0.0, abs=1e-12)

    def test_periodic_table(self):
        grid = np.linspace(-0.5, 0.5, 21)
        a = spectrum_vs_ng(S1Q1, grid)
        b = spectrum_vs_ng(S1Q1, grid + 1)
        for k in a.columns:
            np.testing.assert_allclose(a.columns[k], b.columns[k], rtol=1e-9)

    def test_empty_grid(self):
        with pytest.raises(ValueError):
            spectrum_vs_ng(S1Q1, [])

    def test_higher_pair(self):
        t = spectrum_vs_ng(S1Q1, [0.0], pairs=((0, 2),))
        lv = eigenlevels(S1Q1, "even", 3)
        assert t.columns["even_0_2"][0] == pytest.approx(lv[2] - lv[0], rel=1e-12)


def test_table_record_matches_direct():
    r = device_by_id(load_device_tables(), "S1-Q1")
    assert epsilon0(QubitParams(r.ej_hz, r.ec_hz)) == epsilon0(S1Q1)
