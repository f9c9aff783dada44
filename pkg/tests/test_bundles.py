import random
from dataclasses import replace
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from sohiggs.bundles import (
    DegreeOutOfRange,
    InvalidGauge,
    K,
    LineBundleSymbol,
    MixedFamilies,
    MLine,
    NoPrymFlag,
    CurveContext,
    Section,
    UnsupportedField,
    apply_gauge,
    assemble_sl,
    build_from_datum,
    build_hitchin,
    build_psi_0,
    build_psi_d,
    build_psi_mirror,
    build_psi_sw,
    build_so_nn_hitchin,
    eta_star,
    hitchin_invariants,
    invariant_subsets,
    invariant_subsets_bruteforce,
    o2_stabilizer,
    o2_stabilizer_from_action,
    orbit_equal,
    parity_sign_swap_gauge,
    psi0_swap_gauge,
    psi0_torus_gauge,
    pull_back_sw,
    pushforward_degree,
    pushforward_rank2,
    scaling_formula,
    scaling_gauge,
    so12_admits_polystable,
    stability,
    switching_formula,
    switching_gauge,
    typecheck,
)
from sohiggs.bundles import _unchecked_psi_d
from sohiggs.exact_algebra import char_poly

from strategies import nonzero_rationals, rationals

SMALL = [(n, g) for n in range(1, 5) for g in (2, 3)]


def _rand(rng):
    return Fraction(rng.randint(-50, 50) or 1, rng.randint(1, 50))


def _numeric_psi(rng, n, g=2, d=None):
    top = n * (2 * g - 2)
    d = rng.randint(1, top) if d is None else d
    return build_psi_d(n, d, g, mu=_rand(rng), nu=_rand(rng), q=[_rand(rng) for _ in range(n - 1)])


# ------------------------------------------------------------ symbols


def test_symbol_degrees_and_duals():
    m = LineBundleSymbol(m_power=1, m_degree=3)
    assert (m.dual() * K(2)).degree(2) == -3 + 4
    assert (m * m.dual()).is_trivial()
    t = LineBundleSymbol(m_power=1, torsion="square-trivial")
    assert (t * t).is_trivial() and not t.is_trivial()
    assert LineBundleSymbol(m_power=1, torsion="trivial").is_trivial()
    with pytest.raises(ValueError):
        LineBundleSymbol(m_power=1, m_degree=2, torsion="trivial")


def test_curve_context():
    assert CurveContext(3, double_cover=True).covering_genus == 5
    assert CurveContext(3).covering_genus is None
    with pytest.raises(ValueError):
        CurveContext(1)


# ------------------------------------------------------------ builders


def test_fuchsian_bundle():
    hb = build_hitchin(1, q=[0])
    # V + W = O + (K + K^-1), the uniformizing rank three bundle
    assert [str(s) for s in hb.V.summands] == ["O"]
    assert [str(s) for s in hb.W.summands] == ["K", "K^-1"]
    assert hb.typecheck().ok
    star = eta_star(hb.V, hb.W, hb.eta)
    # chain K -> O -> K^-1: eta* sends K to O with -1, eta sends O to K^-1 with 1
    assert [str(s) for s in star.entries[0]] == ["-1", "0"]
    assert [str(r[0]) for r in hb.eta.entries] == ["0", "1"]


def test_hitchin_n2_pattern():
    hb = build_hitchin(2, q=[True, True])
    names = [[str(s) for s in r] for r in hb.eta.entries]
    assert names == [["q2", "q4"], ["1", "q2"], ["0", "1"]]


@pytest.mark.parametrize("n", range(1, 7))
@pytest.mark.parametrize("g", range(2, 5))
def test_every_family_typechecks(n, g):
    assert build_hitchin(n, genus=g).typecheck().ok
    top = n * (2 * g - 2)
    for d in range(0, top + 1):
        assert build_psi_d(n, d, g, mu=True, nu=True).typecheck().ok, d
    for d in range(1, top + 1):
        assert build_psi_mirror(n, d, g).typecheck().ok, d
    for tor in ("generic", "square-trivial", "trivial"):
        assert build_psi_0(n, g, mu=True, nu=True, torsion=tor).typecheck().ok
    for sw2 in (0, 1):
        assert build_psi_sw(n, g, sw2=sw2).typecheck().ok
    if n >= 2:
        assert build_so_nn_hitchin(n, genus=g).typecheck().ok


def test_degree_range():
    with pytest.raises(DegreeOutOfRange):
        build_psi_d(2, 5, 2)
    with pytest.raises(DegreeOutOfRange):
        build_psi_d(2, -1, 2)
    with pytest.raises(DegreeOutOfRange):
        build_psi_mirror(2, 0, 2)
    with pytest.raises(ValueError):
        build_psi_d(2, 1, 2, mu=False)


def test_maximal_degree_reproduces_hitchin_shape():
    n, g = 2, 2
    hb = build_psi_d(n, n * (2 * g - 2), g, mu=Section.one())
    hit = build_hitchin(n, genus=g)
    assert [str(s) for s in hb.W.summands] == [str(s) for s in hit.W.summands]
    assert hb.typecheck().ok


def test_typecheck_failures():
    hb = build_hitchin(3)
    rows = list(hb.eta.entries)
    rows[1], rows[2] = rows[2], rows[1]
    bad = replace(hb.eta, entries=tuple(rows))
    rep = typecheck(hb.V, hb.W, bad, hb.ctx)
    assert not rep.ok and any("constant 1 over a nontrivial bundle" in e for e in rep.errors)
    over = _unchecked_psi_d(2, 5, 2, mu=True, nu=None, q=None)
    rep = over.typecheck()
    assert not rep.ok and any("negative degree" in e for e in rep.errors)


def test_untwisted_sw_shape_has_mismatched_determinants():
    rep = build_psi_sw(3, 2, twist=False).typecheck()
    assert not rep.det_ok and rep.det_source != rep.det_target
    assert build_psi_sw(3, 2).typecheck().det_ok


# ------------------------------------------------------------ adjoint / assembly


@pytest.mark.parametrize("n,g", SMALL)
def test_adjoint_involution_and_form(n, g):
    rng = random.Random(n * 10 + g)
    hb = _numeric_psi(rng, n, g)
    star = eta_star(hb.V, hb.W, hb.eta)
    back = eta_star(hb.W, hb.V, star)
    assert back.entries == tuple(tuple(s for s in r) for r in back.entries)
    assert [[s.evaluate() for s in r] for r in back.entries] == [[s.evaluate() for s in r] for r in hb.eta.entries]
    phi, j = hb.phi(), hb.form()
    assert (phi.T @ j + j @ phi).is_zero()
    coeffs = char_poly(phi)
    assert not any(coeffs[1::2])
    p = phi
    for k in range(1, 2 * n + 2):
        if k % 2:
            assert p.trace() == 0
        p = p @ phi


# ------------------------------------------------------------ stability


@pytest.mark.parametrize("n,g", SMALL)
def test_psi_d_stable_with_only_m_inverse_invariant(n, g):
    for d in range(1, n * (2 * g - 2) + 1):
        hb = build_psi_d(n, d, g, mu=True, nu=False, q=[False] * (n - 1))
        res = hb.stability()
        assert res.classification == "stable"
        assert res == hb.stability(brute_force=True)
        assert res.witness_degree == -d
        assert "M^-1" in res.witness_labels[0] or res.witness_labels == ("K^-%d" % n,)


@pytest.mark.parametrize("n", range(1, 5))
def test_psi_d_without_mu_is_unstable(n):
    hb = _unchecked_psi_d(n, 1, 2, mu=False, nu=False, q=[False] * (n - 1))
    res = hb.stability()
    assert res.classification == "unstable" and res.witness_degree == 1
    assert res == hb.stability(brute_force=True)


@pytest.mark.parametrize("n", range(1, 5))
def test_psi_0_classes(n):
    for mu in (False, True):
        for nu in (False, True):
            hb = build_psi_0(n, 2, mu=mu, nu=nu)
            res = hb.stability()
            assert res == hb.stability(brute_force=True)
            if mu and nu:
                assert res.classification == "stable"
            elif mu or nu:
                assert res.classification == "unstable"
            else:
                assert res.classification == "strictly-polystable"


def test_psi_sw_classes():
    for n in range(1, 5):
        assert build_psi_sw(n, 2, mu=True).stability().classification == "stable"
        assert build_psi_sw(n, 2, mu=False).stability().classification == "strictly-polystable"


@pytest.mark.parametrize("g", [2, 3, 4])
def test_so12_degree_bound(g):
    for d in range(1, 4 * g):
        assert so12_admits_polystable(d, g) == (d <= 2 * g - 2)


@given(st.integers(1, 4), st.lists(st.booleans(), min_size=8, max_size=8))
def test_invariant_subsets_match_brute_force(n, marks):
    hb = build_psi_0(n, 2, mu=marks[0], nu=marks[1], q=marks[2:2 + n - 1])
    phi = assemble_sl(hb.V, hb.W, hb.eta)
    assert invariant_subsets(phi) == invariant_subsets_bruteforce(phi)


def test_unmarked_section_rejected():
    hb = build_psi_0(2, 2, mu=Section.named("mu"), nu=True)
    with pytest.raises(UnsupportedField):
        hb.stability()


# ------------------------------------------------------------ gauges


def test_scaling_gauge_example():
    hb = build_psi_d(2, 1, 2, mu=3, nu=5, q=[7])
    out = apply_gauge(scaling_gauge(2, 2), hb.datum)
    assert out.nu.evaluate() == 80 and out.q[0].evaluate() == 28 and out.mu.evaluate() == 3
    same = apply_gauge(scaling_gauge(2, 1), hb.datum)
    assert same.to_record() == scaling_formula(hb.datum, 1).to_record()


@pytest.mark.parametrize("n", range(1, 5))
def test_gauges_against_formulas(n):
    rng = random.Random(n)
    for _ in range(10):
        hb = _numeric_psi(rng, n)
        lam = _rand(rng)
        gp = scaling_gauge(n, lam)
        assert gp.check(hb.V, hb.W) == []
        a = apply_gauge(gp, hb.datum)
        assert a.to_record() == scaling_formula(hb.datum, lam).to_record()
        s = apply_gauge(switching_gauge(n), hb.datum)
        assert s.to_record() == switching_formula(hb.datum).to_record()
        assert s.d == -hb.datum.d
        assert build_from_datum(s).typecheck().ok
        assert hitchin_invariants(hb.datum) == hitchin_invariants(s)


@pytest.mark.parametrize("n", range(2, 5))
def test_psi0_gauges_stay_in_orbit(n):
    rng = random.Random(100 + n)
    for _ in range(5):
        hb = build_psi_0(n, 2, mu=_rand(rng), nu=_rand(rng), q=[_rand(rng) for _ in range(n - 1)])
        for gp in (psi0_torus_gauge(n, _rand(rng)), psi0_swap_gauge(n, _rand(rng))):
            assert gp.check(hb.V, hb.W) == []
            out = apply_gauge(gp, hb.datum)
            assert orbit_equal(hb.datum, out)
            assert hitchin_invariants(out) == hitchin_invariants(hb.datum)


def test_parity_sign_swap_gauge():
    for n in range(2, 6):
        hb = build_psi_0(n, 2, mu=1, nu=1)
        problems = parity_sign_swap_gauge(n, 2).check(hb.V, hb.W)
        assert (problems == []) == (n % 2 == 0)
        if problems:
            with pytest.raises(InvalidGauge):
                apply_gauge(parity_sign_swap_gauge(n, 2), hb.datum)


def test_invalid_gauges():
    with pytest.raises(InvalidGauge):
        scaling_gauge(2, 0)
    hb = build_psi_d(2, 1, 2, mu=1, nu=1, q=[1])
    with pytest.raises(InvalidGauge):
        apply_gauge(scaling_gauge(3, 2), hb.datum)
    with pytest.raises(InvalidGauge):
        apply_gauge(scaling_gauge(2, 2), build_psi_d(2, 1, 2).datum)


def test_mirror_matches_switched_shape():
    hb = build_psi_d(3, 2, 2, mu=2, nu=3, q=[1, 1])
    switched = build_from_datum(switching_formula(hb.datum))
    mirror = build_psi_mirror(3, 2, 2, mu=3, nu=2, q=[1, 1])
    assert switched.phi() == mirror.phi()
    assert [s.degree(2) for s in switched.W.summands] == [s.degree(2) for s in mirror.W.summands]


# ------------------------------------------------------------ orbits / invariants


@given(nonzero_rationals, rationals, rationals, nonzero_rationals)
def test_psi_d_orbit_rescaling(mu, nu, q2, lam):
    a = build_psi_d(2, 1, 2, mu=mu, nu=nu, q=[q2]).datum
    b = build_psi_d(2, 1, 2, mu=lam * mu, nu=nu / lam, q=[q2]).datum
    assert orbit_equal(a, b)
    assert hitchin_invariants(a) == hitchin_invariants(b)
    c = build_psi_d(2, 1, 2, mu=mu, nu=nu, q=[q2 + 1]).datum
    assert not orbit_equal(a, c)


def test_psi0_swap_orbit():
    a = build_psi_0(2, 2, mu=2, nu=3, q=[1]).datum
    b = replace(a, m=a.m.inverse(), mu=Section.named("mu", value=3), nu=Section.named("nu", value=2))
    assert orbit_equal(a, b)


def test_psi_sw_orbit_and_pullback():
    a = build_psi_sw(2, 2, mu=3, q=[1]).datum
    assert orbit_equal(a, replace(a, mu=Section.named("mu", value=-3)))
    assert not orbit_equal(a, replace(a, mu=Section.named("mu", value=4)))
    assert pull_back_sw(pull_back_sw(a)) == a
    with pytest.raises(MixedFamilies):
        orbit_equal(a, build_psi_0(2, 2).datum)


def test_zero_field_has_zero_invariants():
    dat = build_psi_0(3, 2, mu=0, nu=0, q=[0, 0]).datum
    assert set(hitchin_invariants(dat)) == {0}


# ------------------------------------------------------------ stabilizers / pushforward


@given(st.booleans(), st.lists(rationals, min_size=3, max_size=3), st.lists(rationals, min_size=3, max_size=3))
def test_stabilizer_table_matches_action(self_dual, mu, nu):
    mu_zero, nu_zero = not any(mu), not any(nu)
    if mu_zero != nu_zero:
        with pytest.raises(ValueError):
            o2_stabilizer(self_dual, mu_zero, nu_zero, False)
        return
    proportional = False
    if not mu_zero:
        ratios = {a / b for a, b in zip(mu, nu) if b}
        proportional = all((a == 0) == (b == 0) for a, b in zip(mu, nu)) and len(ratios) == 1
    assert o2_stabilizer(self_dual, mu_zero, nu_zero, proportional) == o2_stabilizer_from_action(self_dual, mu, nu)


def test_stabilizer_examples():
    assert o2_stabilizer_from_action(True, [0], [0]) == "O(2)"
    assert o2_stabilizer_from_action(False, [0], [0]) == "SO(2)"
    assert o2_stabilizer_from_action(True, [2, 4], [1, 2]) == "Z2"
    assert o2_stabilizer_from_action(False, [2, 4], [1, 2]) == "trivial"


def test_pushforward():
    ctx = CurveContext(2, double_cover=True)
    assert pushforward_rank2(MLine(degree=0, prym=True), ctx).sw2 == 0
    assert pushforward_rank2(MLine(degree=0, prym=True, sw2=1), ctx).sw2 == 1
    with pytest.raises(NoPrymFlag):
        pushforward_rank2(MLine(degree=0), ctx)
    with pytest.raises(NoPrymFlag):
        pushforward_rank2(MLine(degree=0, prym=True), CurveContext(2))
    assert pushforward_degree(0) == 0


def test_datum_records_are_plain():
    import json

    rec = build_psi_d(2, 3, 2, mu=1, nu=2, q=[3]).datum.to_record()
    assert json.loads(json.dumps(rec)) == rec
    assert rec["d"] == 3 and rec["mu"]["value"] == "1"
