import numpy as np
import pytest
from scipy.integrate import cumulative_trapezoid, trapezoid

import starcoupling as sc
from starcoupling import (
    AtPole,
    EdgeCoordinate,
    Momentum,
    MultipleSignChanges,
    PiecewisePolynomial,
    StarPotential,
    ZeroB,
)
import starcoupling.epsilon as eps_mod


@pytest.fixture
def op_factory(vstar, lam_neg):
    def make(eps, scaling=None, potential=None):
        return sc.EpsOperator(
            potential=potential if potential is not None else vstar,
            scaling=scaling if scaling is not None else lam_neg,
            eps=eps,
        )

    return make


def trapezoid_pairing(profile_fn, c, n_edges, active_weight, n_grid=2_000_000):
    """Independent oracle for the resolvent pairing with one active edge.

    Uses the plain-exponential arrangement on a fine trapezoid grid:
    II f f e^{-c|x-y|} via a cumulative integral, minus the separable terms.
    """
    x = np.linspace(0.0, 1.0, n_grid)
    f = profile_fn(x)
    inner_cum = cumulative_trapezoid(f * np.exp(c * x), x, initial=0.0)
    double_abs = 2.0 * trapezoid(f * np.exp(-c * x) * inner_cum, x)
    g = trapezoid(f * np.exp(-c * x), x)
    return double_abs - g**2 + active_weight * g**2


class TestEpsOperator:
    def test_rejects_bad_eps(self, vstar, lam_neg):
        with pytest.raises(ValueError):
            sc.EpsOperator(potential=vstar, scaling=lam_neg, eps=0.0)
        with pytest.raises(ValueError):
            sc.EpsOperator(potential=vstar, scaling=lam_neg, eps=1.5)

    def test_rejects_vanishing_lambda(self, vstar):
        # lambda(eps) = -1 + eps vanishes at eps = 1
        lam = sc.ScalingFunction(lambda1=1.0, resonant=False, lambda0=-1.0)
        with pytest.raises(ValueError):
            sc.EpsOperator(potential=vstar, scaling=lam, eps=1.0)

    def test_resolves_resonant_lambda0(self, op_factory):
        op = op_factory(0.1)
        assert op.lambda0 == pytest.approx(-1.5)
        assert op.lambda_value == pytest.approx(-1.6)


class TestInnerRVV:
    def test_zero_potential(self, zero_potential, free_scaling):
        op = sc.EpsOperator(potential=zero_potential, scaling=free_scaling, eps=0.25)
        assert sc.inner_RV_V(1.0, op) == 0.0

    def test_constant_profile_closed_form(self, op_factory):
        op = op_factory(0.25)
        c = 0.25
        double_abs = 2.0 * (c - 1.0 + np.exp(-c)) / c**2
        g = (1.0 - np.exp(-c)) / c
        expected = (0.25**2 / 2.0) * (2.0 * double_abs - 2.0 * g**2)
        assert sc.inner_RV_V(1.0, op) == pytest.approx(expected, abs=1e-14)

    def test_polynomial_profile_against_riemann_refinement(self, lam_neg):
        odd = PiecewisePolynomial.from_global_coeffs([((0.0, 1.0), [-0.5, 1.0])])
        V = StarPotential([odd, PiecewisePolynomial.zero(), PiecewisePolynomial.zero()])
        lam = sc.ScalingFunction(lambda1=1.0, resonant=False, lambda0=1.0)
        op = sc.EpsOperator(potential=V, scaling=lam, eps=0.25)
        kappa = 1.0
        c = op.eps * kappa
        bracket = trapezoid_pairing(odd.evaluate, c, 3, 2.0 / 3.0)
        expected = (op.eps**2 / (2.0 * kappa)) * bracket
        assert sc.inner_RV_V(kappa, op) == pytest.approx(expected, abs=1e-9)

    def test_small_eps_leading_term(self, op_factory):
        op = op_factory(1e-3)
        value = sc.inner_RV_V(1.0, op)
        ratio = value / (-op.constants.A * 1e-9)
        assert abs(ratio - 1.0) <= 5e-3

    def test_order_doubling_stability(self, op_factory):
        op = op_factory(0.1)
        coarse = sc.inner_RV_V(2.0, op, rule=sc.QuadratureRule(order=32))
        fine = sc.inner_RV_V(2.0, op, rule=sc.QuadratureRule(order=64))
        assert abs(fine - coarse) <= 1e-10 * abs(fine)

    def test_rejects_nonpositive_kappa(self, op_factory):
        with pytest.raises(ValueError):
            sc.inner_RV_V(0.0, op_factory(0.1))


class TestZeta:
    def test_resonant_asymptotic_ratio(self, op_factory):
        op = op_factory(1e-3)
        cc = op.constants
        kappa = 1.0
        z = sc.zeta(op, kappa)
        ratio = z * op.eps**4 * (1.0 - kappa * cc.beta * cc.B) / (-cc.beta)
        assert abs(ratio - 1.0) <= 0.01

    def test_off_resonance_scales_like_eps_cubed(self, vstar):
        lam = sc.ScalingFunction(lambda1=1.0, resonant=False, lambda0=-1.0)
        values = []
        for eps in (1e-2, 1e-3):
            op = sc.EpsOperator(potential=vstar, scaling=lam, eps=eps)
            values.append(sc.zeta(op, 1.0) * eps**3)
        expected = 1.0 / (1.0 / -1.0 - (-2.0 / 3.0))
        assert values[1] == pytest.approx(expected, rel=5e-2)
        assert values[0] == pytest.approx(values[1], rel=5e-2)

    def test_asymptotic_ratio_improves_linearly(self, op_factory):
        kappa = 1.0
        epss = [2**-3, 2**-4, 2**-5, 2**-6, 2**-7]
        deviations = []
        for eps in epss:
            op = op_factory(eps)
            cc = op.constants
            z = sc.zeta(op, kappa)
            ratio = z * op.eps**4 * (1.0 - kappa * cc.beta * cc.B) / (-cc.beta)
            deviations.append(abs(ratio - 1.0))
        fit = sc.fit_rate("zeta_ratio", epss, deviations)
        assert fit.slope >= 0.8

    def test_pole_guard_fires_at_root(self, op_factory):
        op = op_factory(0.05)
        pole = sc.find_pole(op)
        with pytest.raises(AtPole):
            sc.zeta(op, pole.kappa)

    def test_denominator_sign_change_brackets_pole(self, op_factory):
        op = op_factory(0.05)
        pole = sc.find_pole(op)
        below = sc.pole_equation(op, pole.kappa - 1e-3)
        above = sc.pole_equation(op, pole.kappa + 1e-3)
        assert below * above < 0


class TestEpsKernel:
    def test_zero_potential_reduces_to_free(self, zero_potential, free_scaling):
        op = sc.EpsOperator(potential=zero_potential, scaling=free_scaling, eps=0.25)
        ek = sc.resolvent_eps_kernel(op, 1.0)
        fk = sc.free_kernel(3)
        k = Momentum.resolvent(1j)
        for (i, x), (j, y) in [((1, 0.1), (2, 2.0)), ((3, 0.5), (3, 0.5))]:
            assert ek(EdgeCoordinate(i, x), EdgeCoordinate(j, y), k) == pytest.approx(
                fk(EdgeCoordinate(i, x), EdgeCoordinate(j, y), k), abs=1e-15
            )

    def test_pointwise_limit_off_support(self, op_factory, cc_neg):
        lk = sc.resolvent_kernel_limit(cc_neg)
        mom = Momentum.resolvent(1j)
        target = lk(EdgeCoordinate(1, 2.0), EdgeCoordinate(2, 3.0), mom)
        errors = []
        for eps in (2**-3, 2**-4, 2**-5, 2**-6):
            ek = sc.resolvent_eps_kernel(op_factory(eps), 1.0)
            got = ek(EdgeCoordinate(1, 2.0), EdgeCoordinate(2, 3.0), mom)
            errors.append(abs(got - target))
        # linear-in-eps convergence: error drops by roughly half per halving
        assert all(e2 < 0.75 * e1 for e1, e2 in zip(errors, errors[1:]))
        assert errors[-1] <= 8.0 * (2**-6) * errors[0] / (2**-3)

    def test_rank_one_factor_asymptotics(self, op_factory):
        op = op_factory(1e-3)
        cc = op.constants
        kappa, x, y = 1.0, 2.0, 3.0
        f1 = sc.rank_one_factor(op, kappa, 1, np.array([x]))[0]
        f2 = sc.rank_one_factor(op, kappa, 2, np.array([y]))[0]
        ratio = (f1 * f2) / (op.eps**4 * np.exp(-kappa * (x + y)) * cc.Pi[0, 1])
        assert abs(ratio - 1.0) <= 0.01

    def test_symmetry_under_swap(self, op_factory):
        ek = sc.resolvent_eps_kernel(op_factory(0.1), 1.5)
        rng = np.random.default_rng(3)
        for _ in range(10):
            i, j = (int(v) for v in rng.integers(1, 4, 2))
            x, y = rng.uniform(0.0, 2.0, 2)
            a = ek(EdgeCoordinate(i, x), EdgeCoordinate(j, y), None)
            b = ek(EdgeCoordinate(j, y), EdgeCoordinate(i, x), None)
            assert a == pytest.approx(b, abs=1e-13)

    def test_column_solves_operator_equation(self, op_factory):
        # away from the source, a kernel column u satisfies
        # -u'' + kappa^2 u + (lambda/eps^3) V_eps(x) <u, V_eps> = 0;
        # checked by finite differences at a point inside the support
        op = op_factory(0.5)
        kappa = 1.1
        ek = sc.resolvent_eps_kernel(op, kappa)
        j, y = 2, 1.7

        def column(edge, x):
            return ek.on_grid(edge, j, np.atleast_1d(x), np.array([y]))[:, 0].real

        rule = sc.QuadratureRule(order=64)
        pairing = 0.0
        for e in (1, 2, 3):
            p = op.potential.profiles[e - 1]
            if p.is_zero():
                continue
            pairing += op.eps * rule.integrate(
                lambda v, e=e, p=p: column(e, op.eps * v) * p.evaluate(v),
                p.breakpoints,
            )
        x0, h = 0.2, 1e-4
        d2 = (column(1, x0 - h)[0] - 2.0 * column(1, x0)[0] + column(1, x0 + h)[0]) / h**2
        rank_one = (
            op.lambda_value
            / op.eps**3
            * op.potential.profiles[0].evaluate(x0 / op.eps)
            * pairing
        )
        residual = -d2 + kappa**2 * column(1, x0)[0] + rank_one
        scale = max(abs(rank_one), kappa**2 * abs(column(1, x0)[0]))
        assert abs(residual) <= 1e-5 * scale

    def test_momentum_validation(self, op_factory):
        ek = sc.resolvent_eps_kernel(op_factory(0.1), 1.0)
        with pytest.raises(ValueError):
            ek.on_grid(1, 1, [0.5], [0.5], Momentum.scattering(1.0))

    def test_metadata(self, op_factory):
        assert sc.resolvent_eps_kernel(op_factory(0.1), 1.0).operator == "eps"


class TestFindPole:
    def test_pole_result_requires_positive_kappa(self):
        with pytest.raises(ValueError):
            sc.PoleResult(kappa=-1.0, eigenvalue=-1.0, residual=0.0)

    def test_resonant_root_near_limit_pole(self, op_factory):
        pole = sc.find_pole(op_factory(0.01))
        assert pole is not None
        assert abs(pole.kappa - 8.0 / 9.0) <= 0.05
        assert abs(pole.residual) <= eps_mod.TOL_ROOT
        assert pole.eigenvalue == -pole.kappa**2

    def test_positive_coupling_has_no_root(self, vstar, lam_pos):
        op = sc.EpsOperator(potential=vstar, scaling=lam_pos, eps=0.01)
        assert sc.find_pole(op) is None

    def test_non_resonant_above_threshold_has_no_root(self, vstar):
        lam = sc.ScalingFunction(lambda1=1.0, resonant=False, lambda0=-1.0)
        op = sc.EpsOperator(potential=vstar, scaling=lam, eps=0.1)
        assert sc.find_pole(op) is None

    def test_explicit_bracket(self, op_factory):
        pole = sc.find_pole(op_factory(0.01), bracket=(0.5, 1.5))
        assert abs(pole.kappa - 8.0 / 9.0) <= 0.05

    def test_invalid_bracket(self, op_factory):
        with pytest.raises(ValueError):
            sc.find_pole(op_factory(0.01), bracket=(-1.0, 1.0))

    def test_multiple_sign_changes_reported(self, op_factory, monkeypatch):
        wobble = lambda kappa, op, rule=None: np.cos(5.0 * kappa)
        monkeypatch.setattr(eps_mod, "inner_RV_V", wobble)
        with pytest.raises(MultipleSignChanges):
            sc.find_pole(op_factory(0.01), bracket=(0.1, 3.0))

    def test_eigenvalue_error_halves_with_eps(self, op_factory):
        limit_ev = -64.0 / 81.0
        errors = []
        for eps in (2**-3, 2**-4, 2**-5, 2**-6, 2**-7):
            pole = sc.find_pole(op_factory(eps))
            errors.append(abs(pole.eigenvalue - limit_ev))
        for e1, e2 in zip(errors, errors[1:]):
            assert 0.35 <= e2 / e1 <= 0.65


class TestPoleAsymptotic:
    def test_resonant_matches_limit_pole(self, op_factory, cc_neg):
        predictor = sc.pole_asymptotic(op_factory(0.3))
        kappa_limit, _ = sc.limit_pole(cc_neg)
        assert predictor == pytest.approx(kappa_limit, abs=1e-12)

    def test_non_resonant_two_term_value(self, vstar):
        lam = sc.ScalingFunction(lambda1=1.0, resonant=False, lambda0=-1.0)
        op = sc.EpsOperator(potential=vstar, scaling=lam, eps=0.1)
        assert sc.pole_asymptotic(op) == pytest.approx(-26.0 / 3.0, abs=1e-12)

    def test_escaping_predictor_positive(self, vstar):
        lam = sc.ScalingFunction(lambda1=0.1, resonant=False, lambda0=-1.6)
        op = sc.EpsOperator(potential=vstar, scaling=lam, eps=0.05)
        assert sc.pole_asymptotic(op) > 0

    def test_zero_B_guard(self, lam_neg):
        # equal first moments on both active edges: B = 0 but A != 0
        same = PiecewisePolynomial.constant(1.0)
        balanced = PiecewisePolynomial.from_global_coeffs([((0.0, 1.0), [-7.0, 12.0])])
        V = StarPotential([same, balanced])
        theta = sc.moments_theta(V)
        assert abs(theta[0] - theta[1]) < 1e-12
        op = sc.EpsOperator(potential=V, scaling=lam_neg, eps=0.1)
        with pytest.raises(ZeroB):
            sc.pole_asymptotic(op)
