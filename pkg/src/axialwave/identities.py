"""Exact symbolic certification of the closed-form radial structures.

Every closed-form radial quantity used elsewhere in the package (potentials,
multiplier profiles, bulk-density coefficients, static dipole solutions, the
linearized-Kerr profile, ladder constants) is rebuilt here in exact rational
arithmetic and compared against its frozen form.  Derivatives in the tortoise
coordinate are taken symbolically as A d/dr, never numerically.  Logarithmic
terms are handled by treating L = log((r - 2M)/M) as an independent symbol
with dL/dr = 1/(r - 2M), which keeps all arithmetic exact.

This module is the single source of truth for derived rational constants:
tests in other modules fetch expected values from here rather than repeating
magic numbers.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import sympy as sp

R = sp.Symbol("r", positive=True)
M = sp.Symbol("M", positive=True)
# L stands for log((r - 2M)/M); dL/dr = 1/(r - 2M) is wired into radial_derivative.
L = sp.Symbol("L", real=True)
T = sp.Symbol("t", real=True)

_HALF = sp.Rational(1, 2)


def lapse_squared_expr() -> sp.Expr:
    """A = 1 - 2M/r as an exact expression."""
    return 1 - 2 * M / R


def radial_derivative(expr: sp.Expr) -> sp.Expr:
    # chain rule for the log symbol: dL/dr = 1/(r - 2M)
    return sp.expand(sp.diff(expr, R) + sp.diff(expr, L) / (R - 2 * M))


def tortoise_derivative(expr: sp.Expr) -> sp.Expr:
    """d/dr* = A d/dr on radial expressions."""
    return sp.expand(lapse_squared_expr() * radial_derivative(expr))


def exact_zero(expr: sp.Expr) -> bool:
    """True iff expr vanishes identically as a rational function of (r, M)
    with polynomial dependence on the log symbol and on t."""
    e = sp.expand(expr)
    for log_pow in range(7):
        for t_pow in range(5):
            c = e.coeff(L, log_pow).coeff(T, t_pow)
            if sp.cancel(sp.together(c)) != 0:
                return False
    return True


# ---------------------------------------------------------------------------
# closed forms


def spin2_potential_expr() -> sp.Expr:
    """Curvature potential of the spin-2 wave equation, 4A/r^2."""
    return 4 * lapse_squared_expr() / R**2


def spin1_potential_expr() -> sp.Expr:
    """Curvature potential of the spin-1 wave equation, (1 - 8M/r)/r^2."""
    return (1 - 8 * M / R) / R**2


def mode_potential_expr(lam: sp.Expr, pot: sp.Expr) -> sp.Expr:
    """Effective 1+1 potential after the u = r f reduction."""
    return lapse_squared_expr() * (lam / R**2 + 2 * M / R**3 + pot)


def reduced_potential_expr(ell: sp.Expr) -> sp.Expr:
    """Common effective potential A(l(l+1)/r^2 - 6M/r^3), independent of spin."""
    return lapse_squared_expr() * (ell * (ell + 1) / R**2 - 6 * M / R**3)


def morawetz_profile_expr() -> sp.Expr:
    """Radial multiplier profile (1 - 3M/r)(1 + M/r)^2, vanishing at r = 3M."""
    return (1 - 3 * M / R) * (1 + M / R) ** 2


def morawetz_profile_slope_expr() -> sp.Expr:
    """Closed form of the r* derivative of the multiplier profile."""
    return lapse_squared_expr() * (M / R**2) * (1 + M / R) * (1 + 9 * M / R)


def morawetz_weight_expr() -> sp.Expr:
    """Bulk-estimate weight: profile slope plus 2 (profile) A / r."""
    f = morawetz_profile_expr()
    return sp.expand(tortoise_derivative(f) + 2 * f * lapse_squared_expr() / R)


def morawetz_weight_closed_expr() -> sp.Expr:
    """Factored closed form of the weight, A(r+M)(2r^2 - 3Mr + 3M^2)/r^4."""
    return lapse_squared_expr() * (R + M) * (2 * R**2 - 3 * M * R + 3 * M**2) / R**4


def radial_dalembertian(expr: sp.Expr) -> sp.Expr:
    """Plain scalar wave operator on a time-independent radial function,
    w''(r*)/A + (2/r) w'(r*)."""
    a = lapse_squared_expr()
    return sp.expand(
        tortoise_derivative(tortoise_derivative(expr)) / a
        + (2 / R) * tortoise_derivative(expr)
    )


def morawetz_weight_box_expr() -> sp.Expr:
    """The quoted third-derivative combination entering the bulk density.

    Primes are r* derivatives of the multiplier profile.  Note this is NOT
    the plain radial wave operator applied to the weight; the two differ by
    an exact polynomial recorded as a witness in check_base_coefficient.
    The frozen quintic numerators are assembled with THIS combination.
    """
    a = lapse_squared_expr()
    mu = 2 * M / R
    f = morawetz_profile_expr()
    f1 = tortoise_derivative(f)
    f2 = tortoise_derivative(f1)
    f3 = tortoise_derivative(f2)
    mu1 = tortoise_derivative(mu)
    mu2 = tortoise_derivative(mu1)
    return sp.expand(
        f3 / (2 * a)
        + (2 / R) * f2
        - (2 * mu1 / (R * a)) * f1
        + (1 / (a * R)) * (mu1 * a / R - mu2) * f
    )


def bulk_base_coefficient_expr(pot: sp.Expr) -> sp.Expr:
    """Zero-order bulk-density coefficient (-Mf/r^2) P - (1/2) f P' - (1/4) box."""
    f = morawetz_profile_expr()
    return sp.expand(
        -(M * f / R**2) * pot
        - _HALF * f * tortoise_derivative(pot)
        - morawetz_weight_box_expr() / 4
    )


# Frozen quintic numerators over 4 r^8: coefficient i multiplies M^(5-i) r^i.
SPIN2_BULK_NUMERATOR_COEFFS: tuple[int, ...] = (-534, -244, 304, 118, -105, 16)
POST_POINCARE_NUMERATOR_COEFFS: tuple[int, ...] = (-534, -172, 400, 102, -137, 24)

# Slab-exact variants: same assembly with the quoted third-derivative
# combination replaced by the radial wave operator on the weight.  These are
# the unique zero-order coefficients closing the windowed divergence identity
# (certified from the field equation in check_slab_identity); they differ
# from the quoted ones by exactly the witness quartic of
# check_base_coefficient.
SLAB_EXACT_BULK_NUMERATOR_COEFFS: tuple[int, ...] = (-684, -136, 304, 92, -98, 16)
SLAB_EXACT_POST_NUMERATOR_COEFFS: tuple[int, ...] = (-684, -64, 400, 76, -130, 24)

# Poincare constants: least angular eigenvalue on the admissible mode sets.
SPIN2_POINCARE_CONSTANT = 2  # s = 2, l >= 2
SPIN1_POINCARE_CONSTANT = 5  # s = 1, l >= 2


def numerator_from_coeffs(coeffs: Sequence[int]) -> sp.Expr:
    return sp.expand(sum(sp.Integer(c) * M ** (5 - i) * R**i for i, c in enumerate(coeffs)))


def tortoise_expr() -> sp.Expr:
    """r* = r - 3M + 2M L in the exact log-symbol algebra."""
    return R - 3 * M + 2 * M * L


def scaling_weight_expr() -> sp.Expr:
    """Weight 2 t r* A / r used with the conformal scaling multiplier."""
    return 2 * T * tortoise_expr() * lapse_squared_expr() / R


def scaling_vector_divergence_expr() -> sp.Expr:
    """Spacetime divergence of the scaling multiplier Z^t = (t^2 + r*^2)/2,
    Z^r* = t r*: equals t (2 + (2 r*/r)(1 - M/r))."""
    # d_t Z^t contributes t; d_{r*}(A r^2 Z^{r*})/(A r^2) contributes the rest,
    # including a second t from differentiating the bare r* factor.
    rs = tortoise_expr()
    return sp.expand(T * (2 + (2 * rs / R) * (1 - M / R)))


def scaling_zero_order_coefficient_expr(pot: sp.Expr) -> sp.Expr:
    """Potential part of the scaling bulk density,
    (t r*/r) A P - (1/2) P div(Z) - (1/2) Z(P)."""
    rs = tortoise_expr()
    a = lapse_squared_expr()
    z_of_pot = T * rs * tortoise_derivative(pot)  # Z(P) = Z^{r*} dP/dr*
    return sp.expand(
        (T * rs / R) * a * pot
        - _HALF * pot * scaling_vector_divergence_expr()
        - _HALF * z_of_pot
    )


def scaling_coefficient_closed_expr() -> sp.Expr:
    """Closed form 4Mt(r - 2M)/r^5 ((2r - 8M) L - 7r + 12M)."""
    return 4 * M * T * (R - 2 * M) / R**5 * ((2 * R - 8 * M) * L - 7 * R + 12 * M)


def static_dipole_decaying_expr() -> sp.Expr:
    """Decaying branch of the static lowest-mode spin-1 equation, 1/r^2."""
    return 1 / R**2


def static_dipole_growing_expr() -> sp.Expr:
    """Growing branch, (12 M^2 r + 3 M r^2 + r^3 + 24 M^3 L)/(3 r^2).

    Using L = log((r - 2M)/M) instead of log(r - 2M) shifts this branch by a
    constant multiple of the decaying one, so the spanned solution space is
    unchanged; at M = 1 the two conventions coincide.
    """
    return (12 * M**2 * R + 3 * M * R**2 + R**3 + 24 * M**3 * L) / (3 * R**2)


def kerr_dipole_profile_expr(spin_rate: sp.Expr) -> sp.Expr:
    """Lowest-mode spin-1 profile of a linearized Kerr solution, -6 M a / r^2."""
    return -6 * M * spin_rate / R**2


def static_dipole_operator(phi: sp.Expr) -> sp.Expr:
    """Static lowest-mode spin-1 operator,
    (D/r^2) phi'' + ((2r - 2M)/r^2) phi' - (2/r^2)(1 - 4M/r) phi, D = r^2 - 2Mr."""
    delta = R**2 - 2 * M * R
    return sp.expand(
        (delta / R**2) * radial_derivative(radial_derivative(phi))
        + ((2 * R - 2 * M) / R**2) * radial_derivative(phi)
        - (2 / R**2) * (1 - 4 * M / R) * phi
    )


def ladder_constant_squared(ell: int, spin_from: int = 1) -> Fraction:
    """Square of the raising-ladder constant from spin s to s+1 at fixed l,
    (l - s)(l + s + 1)/2; vanishes when l = spin_from."""
    s = spin_from
    return Fraction((ell - s) * (ell + s + 1), 2)


def energy_zero_order_factor(ell: int, spin: int) -> sp.Expr:
    """r^3 (Lambda/r^2 + P) for the given mode, a linear polynomial in r."""
    lam = ell * (ell + 1) - spin**2
    pot = spin2_potential_expr() if spin == 2 else spin1_potential_expr()
    return sp.expand(R**3 * (sp.Integer(lam) / R**2 + pot))


# ---------------------------------------------------------------------------
# check machinery


@dataclass
class CheckReport:
    name: str
    passed: bool
    details: dict[str, str] = field(default_factory=dict)


def _fmt(x) -> str:
    return str(sp.nsimplify(x)) if isinstance(x, sp.Expr) else str(x)


def _real_roots_above(poly_in_r: sp.Expr, lower: sp.Rational) -> list[sp.Expr]:
    p = sp.Poly(sp.expand(poly_in_r), R)
    return [rt for rt in p.real_roots() if rt > lower]


def check_f_identities() -> CheckReport:
    """Multiplier profile and weight: closed forms, anchors, boundedness."""
    a = lapse_squared_expr()
    f = morawetz_profile_expr()
    f1 = tortoise_derivative(f)
    details: dict[str, str] = {}
    ok = True

    ok &= exact_zero(f1 - morawetz_profile_slope_expr())
    details["slope_closed_form"] = "identical"
    ok &= exact_zero(morawetz_weight_expr() - morawetz_weight_closed_expr())
    details["weight_closed_form"] = "identical"
    ok &= sp.simplify(f.subs(R, 3 * M)) == 0
    details["profile_at_photon_sphere"] = "0"
    anchor = f1.subs({M: 1, R: 3})
    ok &= sp.nsimplify(anchor) == sp.Rational(16, 81)
    details["slope_at_photon_sphere_unit_mass"] = _fmt(sp.nsimplify(anchor))
    # tortoise calculus anchor used throughout: d/dr (r - 3M + 2M L) = 1/A
    ok &= exact_zero(radial_derivative(tortoise_expr()) - 1 / a)
    details["tortoise_derivative"] = "1/A"

    # boundedness by sampling exact rationals, plus asymptotic limits
    samples = [2 * M, sp.Rational(5, 2) * M, 3 * M, 4 * M, 10 * M, 100 * M]
    f_vals = [sp.nsimplify(f.subs(R, s).subs(M, 1)) for s in samples]
    f1_vals = [sp.nsimplify(f1.subs(R, s).subs(M, 1)) for s in samples]
    ok &= max(abs(v) for v in f_vals) <= sp.Rational(9, 8)
    ok &= all(v >= 0 for v in f1_vals)
    ok &= sp.limit(f.subs(M, 1), R, sp.oo) == 1
    ok &= sp.limit(f1.subs(M, 1), R, sp.oo) == 0
    details["profile_samples_unit_mass"] = ", ".join(map(str, f_vals))
    details["slope_samples_unit_mass"] = ", ".join(map(str, f1_vals))
    details["profile_limit_infinity"] = "1"
    return CheckReport("check_f_identities", bool(ok), details)


def check_base_coefficient(
    numerator_coeffs: Sequence[int] | None = None,
) -> CheckReport:
    """Assemble the spin-2 zero-order bulk coefficient and compare it with the
    frozen quintic numerator over 4 r^8, exactly."""
    coeffs = tuple(numerator_coeffs or SPIN2_BULK_NUMERATOR_COEFFS)
    target = numerator_from_coeffs(coeffs) / (4 * R**8)
    assembled = bulk_base_coefficient_expr(spin2_potential_expr())
    diff = sp.cancel(sp.together(assembled - target))
    details: dict[str, str] = {}
    ok = diff == 0
    details["identical_polynomial"] = str(bool(ok)).lower()
    if not ok:
        details["coefficient_diff_times_4r8"] = str(sp.expand(diff * 4 * R**8))

    numer = numerator_from_coeffs(coeffs)
    at_horizon = numer.subs({M: 1, R: 2})
    at_photon = numer.subs({M: 1, R: 3})
    ok &= at_horizon == -30 if numerator_coeffs is None else True
    details["numerator_at_unit_mass_r2"] = str(at_horizon)
    details["value_at_unit_mass_r3"] = _fmt(sp.nsimplify(at_photon / sp.Integer(4 * 3**8)))

    roots = _real_roots_above(numer.subs(M, 1), sp.Integer(2))
    details["sign_changes_outside_horizon"] = str(len(roots))
    details["negative_region_unit_mass"] = (
        "(2, %s)" % sp.N(roots[0], 10) if len(roots) == 1 else str([sp.N(rt, 10) for rt in roots])
    )

    # witness: the quoted box combination is not the plain wave operator on the
    # weight; the discrepancy is an exact quartic over r^8, and subtracting it
    # from the frozen quintic numerator factors with roots at 2M, 3M, 4M.
    gap = sp.cancel(
        sp.together(
            morawetz_weight_box_expr() - radial_dalembertian(morawetz_weight_expr())
        )
    )
    gap_numer = -150 * M**5 + 108 * M**4 * R - 26 * M**2 * R**3 + 7 * M * R**4
    ok &= sp.cancel(gap - gap_numer / R**8) == 0
    details["box_vs_wave_operator_gap"] = "(7Mr^4 - 26M^2r^3 + 108M^4r - 150M^5)/r^8"
    factored = 16 * (R - 2 * M) * (R - 3 * M) * (R - 4 * M) * (R + M) ** 2
    ok &= sp.expand(numerator_from_coeffs(SPIN2_BULK_NUMERATOR_COEFFS) - gap_numer - factored) == 0
    details["numerator_minus_gap_factored"] = "16 (r-2M)(r-3M)(r-4M)(r+M)^2"
    return CheckReport("check_base_coefficient", bool(ok), details)


def check_post_poincare(
    numerator_coeffs: Sequence[int] | None = None,
) -> CheckReport:
    """Borrow the least angular eigenvalue from the angular term and verify the
    improved coefficient against its frozen quintic; certify positivity."""
    coeffs = tuple(numerator_coeffs or POST_POINCARE_NUMERATOR_COEFFS)
    target = numerator_from_coeffs(coeffs) / (4 * R**8)
    f = morawetz_profile_expr()
    angular = (f / R) * (1 - 3 * M / R)
    details: dict[str, str] = {}

    base2 = bulk_base_coefficient_expr(spin2_potential_expr())
    post2 = sp.expand(base2 + (SPIN2_POINCARE_CONSTANT / R**2) * angular)
    ok = sp.cancel(sp.together(post2 - target)) == 0
    details["spin2_identical_polynomial"] = str(bool(ok)).lower()

    base1 = bulk_base_coefficient_expr(spin1_potential_expr())
    post1 = sp.expand(base1 + (SPIN1_POINCARE_CONSTANT / R**2) * angular)
    same = sp.cancel(sp.together(post1 - post2)) == 0
    ok &= same
    details["spin1_borrow_gives_same_quintic"] = str(bool(same)).lower()
    base1_numer = sp.expand(sp.cancel(sp.together(base1)) * 4 * R**8)
    details["spin1_base_numerator"] = str(base1_numer)

    numer = numerator_from_coeffs(coeffs)
    at_horizon = numer.subs({M: 1, R: 2})
    details["numerator_at_unit_mass_r2"] = str(at_horizon)
    if numerator_coeffs is None:
        ok &= at_horizon == 114

    # positivity certificate on [2M, infinity): Sturm count of real roots plus
    # a positive horizon value and positive leading coefficient
    p = sp.Poly(numer.subs(M, 1), R)
    n_roots = p.count_roots(2, None)
    lead = p.LC()
    ok &= n_roots == 0 and at_horizon > 0 and lead > 0
    details["roots_on_exterior"] = str(n_roots)
    details["leading_coefficient"] = str(lead)
    if n_roots:
        bad = _real_roots_above(numer.subs(M, 1), sp.Integer(2))
        lo = sp.floor(bad[0] * 10**6) / sp.Integer(10**6)
        details["violation_bracket"] = "[%s, %s]" % (lo, lo + sp.Rational(1, 10**6))

    # subdivision sign table, exact evaluation at rational sample points
    grid = [sp.Rational(p_, q_) for p_, q_ in
            [(2, 1), (9, 4), (5, 2), (11, 4), (3, 1), (7, 2), (4, 1), (6, 1), (10, 1), (100, 1)]]
    signs = "".join("+" if numer.subs({M: 1, R: x}) > 0 else "-" for x in grid)
    details["sign_table_unit_mass"] = signs
    if numerator_coeffs is None:
        ok &= signs == "+" * len(grid)
    return CheckReport("check_post_poincare", bool(ok), details)


def check_slab_identity() -> CheckReport:
    """Derive the windowed radial-multiplier identity from the field equation.

    Writes the time component of the weighted radial-multiplier current for a
    solution of the unreduced wave equation, differentiates in time on shell,
    and splits the result into an exact r* divergence plus a bulk density.
    Certifies: (i) the bulk density is slope |d|^2 + A [angular Lambda/r^2 +
    base] |w|^2 per r^2 dr* dt with base equal to the slab-exact quintic over
    4 r^8; (ii) the slab-exact base is the quoted assembly with the quoted
    third-derivative combination replaced by the radial wave operator on the
    weight, their difference being the witness quartic of
    check_base_coefficient; (iii) the post-borrowing slab-exact numerator is
    positive on r >= 2M, so pointwise nonnegativity of the runtime density
    survives the correction."""
    w, w_t, w_s = sp.symbols("w_fld a_fld d_fld", real=True)
    w_ss, w_ts = sp.symbols("dss dts", real=True)
    a2 = lapse_squared_expr()
    lam = sp.Symbol("lam", real=True)
    pot = spin2_potential_expr()
    q = lam / R**2 + pot
    f = morawetz_profile_expr()
    slope = morawetz_profile_slope_expr()
    om = morawetz_weight_expr()
    om_s = tortoise_derivative(om)

    def d_t(e):
        # on-shell time derivative: w_tt = w_ss + (2A/r) w_s - A q w
        return (
            sp.diff(e, w) * w_t
            + sp.diff(e, w_t) * (w_ss + 2 * a2 / R * w_s - a2 * q * w)
            + sp.diff(e, w_s) * w_ts
        )

    def d_s(e):
        # total r* derivative: field arguments plus radial coefficients
        return (
            sp.diff(e, w) * w_s
            + sp.diff(e, w_t) * w_ts
            + sp.diff(e, w_s) * w_ss
            + a2 * sp.diff(e, R)
        )

    j_t = (f * w_t * w_s + om / 2 * w * w_t) * R**2
    s_flux = (
        f * R**2 * (w_s**2 + w_t**2) / 2
        + om / 2 * R**2 * w * w_s
        - R**2 * (a2 * q * f + om_s / 2) * w**2 / 2
    )
    base = sp.expand(
        -(M * f / R**2) * pot
        - _HALF * f * tortoise_derivative(pot)
        - radial_dalembertian(om) / 4
    )
    angular = (f / R) * (1 - 3 * M / R)
    bulk = (slope * w_s**2 + a2 * (angular * lam / R**2 + base) * w**2) * R**2

    residual = sp.expand(d_t(j_t) - d_s(s_flux) + bulk)
    pol = sp.Poly(residual, w, w_t, w_s, w_ss, w_ts)
    ok = all(sp.cancel(sp.together(c)) == 0 for c in pol.coeffs())
    details: dict[str, str] = {}
    details["divergence_identity"] = str(bool(ok)).lower()

    target = numerator_from_coeffs(SLAB_EXACT_BULK_NUMERATOR_COEFFS) / (4 * R**8)
    same = sp.cancel(sp.together(base - target)) == 0
    ok &= same
    details["base_identical_polynomial"] = str(bool(same)).lower()

    # relation to the quoted family: difference is the recorded witness quartic
    gap_numer = -150 * M**5 + 108 * M**4 * R - 26 * M**2 * R**3 + 7 * M * R**4
    tie = sp.expand(
        numerator_from_coeffs(SLAB_EXACT_BULK_NUMERATOR_COEFFS)
        - numerator_from_coeffs(SPIN2_BULK_NUMERATOR_COEFFS)
        - gap_numer
    ) == 0
    ok &= tie
    details["difference_to_quoted"] = "witness quartic" if tie else "MISMATCH"

    # post-borrowing family: same least-eigenvalue borrowing, spin-1 agrees
    post_target = numerator_from_coeffs(SLAB_EXACT_POST_NUMERATOR_COEFFS) / (4 * R**8)
    post2 = sp.expand(base + (SPIN2_POINCARE_CONSTANT / R**2) * angular)
    ok &= sp.cancel(sp.together(post2 - post_target)) == 0
    base1 = sp.expand(
        -(M * f / R**2) * spin1_potential_expr()
        - _HALF * f * tortoise_derivative(spin1_potential_expr())
        - radial_dalembertian(om) / 4
    )
    post1 = sp.expand(base1 + (SPIN1_POINCARE_CONSTANT / R**2) * angular)
    ok &= sp.cancel(sp.together(post1 - post2)) == 0

    numer = numerator_from_coeffs(SLAB_EXACT_POST_NUMERATOR_COEFFS)
    p = sp.Poly(numer.subs(M, 1), R)
    at_horizon = numer.subs({M: 1, R: 2})
    n_roots = p.count_roots(2, None)
    ok &= n_roots == 0 and at_horizon > 0 and p.LC() > 0
    details["post_numerator_at_unit_mass_r2"] = str(at_horizon)
    details["post_roots_on_exterior"] = str(n_roots)
    return CheckReport("check_slab_identity", bool(ok), details)


def check_poincare_constants() -> CheckReport:
    """Quadrature verification that the angular gradient satisfies
    int |grad Y|^2 = Lambda int |Y|^2, and that the least Lambda over the
    admissible sets is 2 (spin 2) and 5 (spin 1)."""
    from . import harmonics

    details: dict[str, str] = {}
    ok = True
    worst = 0.0
    for spin in (1, 2):
        for ell in range(max(spin, 1), 9):
            lam = ell * (ell + 1) - spin**2
            ratio = harmonics.angular_gradient_ratio(spin, ell)
            err = abs(ratio - lam) / max(lam, 1)
            worst = max(worst, err)
            ok &= err <= 1e-8
    details["max_relative_eigenvalue_error"] = "%.3e" % worst
    spin2_min = min(ell * (ell + 1) - 4 for ell in range(2, 9))
    spin1_min = min(ell * (ell + 1) - 1 for ell in range(2, 9))
    ok &= spin2_min == SPIN2_POINCARE_CONSTANT
    ok &= spin1_min == SPIN1_POINCARE_CONSTANT
    details["spin2_minimum"] = str(spin2_min)
    details["spin1_minimum"] = str(spin1_min)
    details["spin1_lowest_mode_eigenvalue"] = "1 (excluded class)"
    return CheckReport("check_poincare_constants", bool(ok), details)


def check_reduction_identity() -> CheckReport:
    """Exact verification that u = r f converts the per-mode second-order
    operator into the flat 1+1 form with the common effective potential."""
    a = lapse_squared_expr()
    delta = R**2 - 2 * M * R
    lam, pot = sp.symbols("lam P", real=True)
    f0, f1, f2, ftt = sp.symbols("f0 f1 f2 ftt", real=True)

    mode_op = (
        -(R**2 / delta) * ftt
        + (delta / R**2) * f2
        + ((2 * R - 2 * M) / R**2) * f1
        - (lam / R**2) * f0
        - pot * f0
    )
    # u = r f expressed through the f symbols
    u0 = R * f0
    u_r = f0 + R * f1
    u_rstar2 = a * (2 * M / R**2) * u_r + a * a * (2 * f1 + R * f2)
    target = -R * ftt + u_rstar2 - mode_potential_expr(lam, pot) * u0

    diff = sp.expand((delta / R) * mode_op - target)
    ok = all(
        sp.cancel(sp.together(c)) == 0
        for c in [diff.coeff(s) for s in (f1, f2, ftt)]
        + [diff.coeff(f0).coeff(lam), diff.coeff(f0).coeff(pot), diff.coeff(f0).coeff(lam, 0).coeff(pot, 0)]
    )
    details = {"general_identity": "identical for arbitrary Lambda and potential"}

    ell = sp.Symbol("ell", positive=True)
    spin2 = mode_potential_expr(ell * (ell + 1) - 4, spin2_potential_expr())
    spin1 = mode_potential_expr(ell * (ell + 1) - 1, spin1_potential_expr())
    common = reduced_potential_expr(ell)
    ok &= exact_zero(spin2 - common)
    ok &= exact_zero(spin1 - common)
    details["same_effective_potential_both_spins"] = "true"

    lowest = mode_potential_expr(sp.Integer(1), spin1_potential_expr())
    ok &= exact_zero(lowest - a * (2 / R**2 - 6 * M / R**3))
    details["lowest_spin1_effective_potential"] = "A (2/r^2 - 6M/r^3)"

    anchor2 = common.subs({ell: 2, M: 1, R: 3})
    anchor1 = lowest.subs({M: 1, R: 4})
    ok &= sp.nsimplify(anchor2) == sp.Rational(4, 27)
    ok &= sp.nsimplify(anchor1) == sp.Rational(1, 64)
    details["spin2_l2_anchor_r3"] = _fmt(sp.nsimplify(anchor2))
    details["spin1_l1_anchor_r4"] = _fmt(sp.nsimplify(anchor1))
    return CheckReport("check_reduction_identity", bool(ok), details)


def check_static_dipole() -> CheckReport:
    """Both closed-form static lowest-mode solutions are annihilated exactly by
    the static operator; the growing branch grows linearly."""
    phi1 = static_dipole_decaying_expr()
    phi2 = static_dipole_growing_expr()
    ok = exact_zero(static_dipole_operator(phi1))
    ok &= exact_zero(static_dipole_operator(phi2))
    ok &= exact_zero(static_dipole_operator(phi1 + phi2))
    growth = sp.limit((phi2 / R).subs({L: sp.log((R - 2 * M) / M)}).subs(M, 1), R, sp.oo)
    ok &= growth == sp.Rational(1, 3)
    details = {
        "decaying_branch_residual": "0",
        "growing_branch_residual": "0",
        "sum_residual": "0",
        "growing_branch_rate": "r/3 at infinity",
    }
    return CheckReport("check_static_dipole", bool(ok), details)


def check_scaling_coefficient() -> CheckReport:
    """Assemble the potential part of the scaling bulk density and match the
    closed form 4Mt(r-2M)/r^5 ((2r-8M)L - 7r + 12M) exactly."""
    assembled = scaling_zero_order_coefficient_expr(spin2_potential_expr())
    closed = scaling_coefficient_closed_expr()
    ok = exact_zero(assembled - closed)
    details: dict[str, str] = {"identical": str(bool(ok)).lower()}

    g = (2 * R - 8 * M) * L - 7 * R + 12 * M
    ok &= sp.expand(g.subs({R: 4 * M, L: sp.log(2)}) + 16 * M) == 0
    details["log_free_factor_at_r4"] = "-16M"
    # near the horizon the log factor dominates: (2r - 8M) -> -4M < 0 and
    # L -> -infinity give g -> +infinity, while the (r - 2M) prefactor -> 0,
    # so the coefficient tends to zero through positive values
    g_near = g.subs({M: 1, R: 2 + sp.Rational(1, 10**9), L: sp.log(sp.Rational(1, 10**9))})
    ok &= g_near > 0
    details["sign_near_horizon"] = "positive (log branch dominates)"
    gl = sp.limit(
        (4 * M * T * (R - 2 * M) / R**5 * g)
        .subs({L: sp.log((R - 2 * M) / M), M: 1, T: 1}),
        R,
        2,
        "+",
    )
    ok &= gl == 0
    details["horizon_limit"] = "0"

    # coarse certified brackets for the negative window at unit mass
    gf = sp.lambdify(R, g.subs({M: 1, L: sp.log(R - 2)}), "math")
    ok &= gf(2.5) < 0 < gf(2.1)
    ok &= gf(42) < 0 < gf(43)
    details["inner_root_bracket_unit_mass"] = "(2.1, 2.5)"
    details["outer_root_bracket_unit_mass"] = "(42, 43)"
    return CheckReport("check_scaling_coefficient", bool(ok), details)


def check_stress_identity() -> CheckReport:
    """The two energy-density forms differ by an exact r* derivative:
    r^2 T_tt(f) - uform(u) = d/dr* [ -A u^2 / (2r) ] with u = r f."""
    a = lapse_squared_expr()
    lam, pot = sp.symbols("lam P", real=True)
    u0, u1, ut = sp.symbols("u0 u1 ut", real=True)

    f_val = u0 / R
    f_rstar = (u1 - a * u0 / R) / R
    f_t = ut / R
    lhs = R**2 * (
        _HALF * f_t**2
        + _HALF * f_rstar**2
        + _HALF * a * (lam / R**2 + pot) * f_val**2
    )
    uform = _HALF * ut**2 + _HALF * u1**2 + _HALF * mode_potential_expr(lam, pot) * u0**2
    boundary = tortoise_derivative(-a / (2 * R)) * u0**2 + (-a / R) * u0 * u1
    diff = sp.expand(lhs - uform - boundary)
    ok = all(
        sp.cancel(sp.together(diff.coeff(mon))) == 0
        for mon in (u0**2, u0 * u1, u1**2, ut**2)
    ) and sp.cancel(sp.together(diff.subs({u0: 0, u1: 0, ut: 0}))) == 0
    details = {
        "boundary_term": "-A u^2 / (2r)",
        "cross_coefficient": "-A/r",
        "quadratic_coefficient": "A^2/(2r^2) - A M/r^3",
    }
    return CheckReport("check_stress_identity", bool(ok), details)


def check_kerr_kernel() -> CheckReport:
    """The linearized-Kerr profile is static, solves the static lowest-mode
    equation, and sources no spin-2 content."""
    a1 = sp.Symbol("a1", real=True)
    b = kerr_dipole_profile_expr(a1)
    ok = exact_zero(static_dipole_operator(b))
    ok &= sp.expand(radial_derivative(R**2 * b)) == 0
    ok &= ladder_constant_squared(1) == 0
    details = {
        "static_equation_residual": "0",
        "radial_source_r2b": "constant, derivative 0",
        "lowest_mode_ladder_constant": "0 (no spin-2 partner)",
        "profile": "-6 M a / r^2",
    }
    return CheckReport("check_kerr_kernel", bool(ok), details)


def check_ladder_constants() -> CheckReport:
    """Raising-ladder constants squared, (l-1)(l+2)/2 from spin 1 to spin 2."""
    expected = {1: Fraction(0), 2: Fraction(2), 3: Fraction(5), 4: Fraction(9),
                5: Fraction(14), 6: Fraction(20), 7: Fraction(27), 8: Fraction(35)}
    table = {ell: ladder_constant_squared(ell) for ell in range(1, 9)}
    ok = table == expected
    details = {"squares_l1_to_l8": ", ".join(str(v) for v in table.values())}
    return CheckReport("check_ladder_constants", bool(ok), details)


def check_sign_facts() -> CheckReport:
    """Zero-order energy-density factors r^3 (Lambda/r^2 + P) are linear in r;
    the lowest spin-1 mode's factor is negative inside r = 4M."""
    ok = sp.expand(energy_zero_order_factor(1, 1) - (2 * R - 8 * M)) == 0
    ok &= sp.expand(energy_zero_order_factor(2, 1) - (6 * R - 8 * M)) == 0
    ok &= sp.expand(energy_zero_order_factor(2, 2) - (6 * R - 8 * M)) == 0
    details = {
        "spin1_lowest": "2(r - 4M), negative inside r = 4M",
        "spin1_l2": "6r - 8M",
        "spin2_l2": "6r - 8M (identical to spin-1 l = 2)",
    }
    return CheckReport("check_sign_facts", bool(ok), details)


# ---------------------------------------------------------------------------
# multiplier quadratic forms in the horizon-regular chart
#
# State convention: w = f, a = df/ds with s the horizon-regular time, and
# d = df/dr at fixed s.  On a graph slice t = tau + h(r*) the tangential
# derivative is e = d/dr*[f(tau + h, .)] = f_r* + h' f_t, related to the chart
# state by d = (e - (h' + mu) a)/A with mu = 2M/r.  The frozen tables below
# are exactly what the numeric energy module evaluates; the checks re-derive
# them from the stress tensor and the chart metric.

STATE_W, STATE_A, STATE_D, STATE_E = sp.symbols("w a d e", real=True)
PROFILE_N, PROFILE_Y = sp.symbols("n y", real=True)
PROFILE_N_SLOPE, PROFILE_Y_SLOPE = sp.symbols("np yp", real=True)
POTENTIAL, POTENTIAL_SLOPE = sp.symbols("P Pp", real=True)
ANGULAR = sp.Symbol("lam", real=True)
GRAPH_SLOPE = sp.Symbol("hp", real=True)


def redshift_bulk_form() -> dict[str, sp.Expr]:
    """Coefficients of the multiplier bulk term (divergence of the current)
    for N = n(r) d_s + y(r) d_r, quadratic in the state (w, a, d)."""
    n, y = PROFILE_N, PROFILE_Y
    ns, ys = PROFILE_N_SLOPE, PROFILE_Y_SLOPE
    pot, pots, lam = POTENTIAL, POTENTIAL_SLOPE, ANGULAR
    return {
        "ww": -(pot * ys / 2 + pot * y / R + pots * y / 2 + lam * ys / (2 * R**2)),
        "aa": 2 * M * ns / R + M * ys / R + M * y / R**2 + ys / 2 + y / R,
        "ad": ns * (1 - 2 * M / R) - 2 * M * y / R**2,
        "dd": -M * ys / R + M * y / R**2 + ys / 2 - y / R,
    }


def redshift_energy_form() -> dict[str, sp.Expr]:
    """Coefficients of the contracted energy density T(N, N)."""
    n, y = PROFILE_N, PROFILE_Y
    pot, lam = POTENTIAL, ANGULAR
    return {
        "ww": (lam / R**2 + pot) * ((n**2 - y**2) / 2 - (M / R) * (n + y) ** 2),
        "aa": 2 * M**2 * (n + y) ** 2 / R**2 + 2 * M * y * (n + y) / R
        + (n**2 + y**2) / 2,
        "ad": 2 * (-2 * M**2 * (n + y) ** 2 / R**2 + M * (n**2 - y**2) / R + n * y),
        "dd": 2 * M**2 * (n + y) ** 2 / R**2 - 2 * M * n * (n + y) / R
        + (n**2 + y**2) / 2,
    }


def t_energy_form() -> dict[str, sp.Expr]:
    """T(T, T) for the static Killing multiplier, in the chart state."""
    pot, lam = POTENTIAL, ANGULAR
    return {
        "ww": (1 - 2 * M / R) * (lam / R**2 + pot) / 2,
        "aa": 2 * M**2 / R**2 + _HALF,
        "ad": 2 * M * (1 - 2 * M / R) / R,
        "dd": 2 * M**2 / R**2 - 2 * M / R + _HALF,
    }


def graph_flux_form() -> dict[str, sp.Expr]:
    """Flux density of the N-current through a graph slice of slope h'(r*),
    quadratic in the slice state (w, a, e); the gap-stable arrangement that
    the numeric energy module evaluates verbatim.

    All coefficients stay finite as r -> 2M whenever y vanishes at least
    linearly in the gap r - 2M."""
    n, y, hp = PROFILE_N, PROFILE_Y, GRAPH_SLOPE
    gap = R - 2 * M
    y_over_gap = y / gap
    fac = 1 - hp**2
    return {
        "ww": (ANGULAR / R**2 + POTENTIAL)
        * ((n - hp * y) / 2 - (M / R) * (n + y)),
        "aa": fac * (n / 2 - y_over_gap * (M + hp * R / 2)),
        "ae": fac * R * y_over_gap,
        "ee": n / 2 + y_over_gap * (hp * R / 2 - M),
    }


def z_direct_expr(*, weighted: bool = False) -> sp.Expr:
    """Density of the conformal-scaling energy on a flat slice t = const,
    in the state (w, a, d) with d = f_r*; optionally with the weight
    correction whose bulk term carries the good sign."""
    rs = tortoise_expr()
    a2 = lapse_squared_expr()
    q = ANGULAR / R**2 + POTENTIAL
    u2 = (T - rs) ** 2 / 4
    v2 = (T + rs) ** 2 / 4
    dens = _HALF * (
        u2 * (STATE_A - STATE_D) ** 2
        + v2 * (STATE_A + STATE_D) ** 2
        + (u2 + v2) * a2 * q * STATE_W**2
    )
    if weighted:
        dens = dens + T * rs * a2 / R * STATE_W * STATE_A
        dens = dens - rs * a2 / (2 * R) * STATE_W**2
    return dens


def z_decomposed_expr() -> sp.Expr:
    """Manifestly organized form of the weighted conformal-scaling density:
    null-pair squares plus complete squares mixing the field with its
    derivatives.  Differs from z_direct_expr(weighted=True) by an exact
    r* derivative (certified by check_z_split)."""
    rs = tortoise_expr()
    a2 = lapse_squared_expr()
    mu = 2 * M / R
    q = ANGULAR / R**2 + POTENTIAL
    u2 = (T - rs) ** 2 / 4
    v2 = (T + rs) ** 2 / 4
    s_out = 2 * (T * STATE_A + rs * STATE_D)
    s_in = 2 * (T * STATE_D + rs * STATE_A)
    return _HALF * (
        mu / 8 * (s_out**2 + s_in**2)
        + (u2 + v2) * a2 * q * STATE_W**2
        + a2 / 2 * (
            (s_out / 2 + rs / R * STATE_W) ** 2
            + (s_in / 2 + T / R * STATE_W) ** 2
        )
    )


def _poly_coeffs_3(expr: sp.Expr, x1: sp.Symbol, x2: sp.Symbol, x3: sp.Symbol):
    pol = sp.Poly(sp.expand(expr), x1, x2, x3)
    if pol.total_degree() > 2:
        raise ValueError("density is not quadratic in the state")
    def mono(i: int, j: int, k: int) -> sp.Expr:
        return pol.coeff_monomial(x1**i * x2**j * x3**k)
    return mono


def check_redshift_forms() -> CheckReport:
    """Re-derive every multiplier density table from first principles.

    Builds the stress tensor of the reduced wave equation in the
    horizon-regular chart, forms the current of a general radial multiplier
    N = n(r) d_s + y(r) d_r, and certifies: (i) the divergence of the current,
    on solutions, is first order and matches redshift_bulk_form; (ii) the
    contraction T(N, N) matches redshift_energy_form, reducing to
    t_energy_form at (n, y) = (1, 0); (iii) the flux density through a graph
    slice matches graph_flux_form and reduces to the static energy density on
    flat slices; (iv) the static multiplier has identically zero bulk term."""
    s = sp.Symbol("s", real=True)
    mu = 2 * M / R
    a2 = 1 - mu
    g = sp.Matrix([[-a2, mu], [mu, 1 + mu]])
    ginv = g.inv()
    coords = (s, R)

    f = sp.Function("f")(s, R)
    pot_f = sp.Function("pot")(R)
    q = ANGULAR / R**2 + pot_f
    df = sp.Matrix([sp.diff(f, c) for c in coords])
    grad2 = sp.expand((df.T * ginv * df)[0, 0])
    stress = sp.Matrix(
        2, 2,
        lambda i, j: df[i] * df[j] - g[i, j] * (grad2 + q * f**2) / 2,
    )
    n_f = sp.Function("prof_n")(R)
    y_f = sp.Function("prof_y")(R)
    nvec = sp.Matrix([n_f, y_f])
    j_low = stress * nvec
    j_up = ginv * j_low

    # On-shell reduction: substitute the second time derivative from the wave
    # equation; the remaining second derivatives must cancel identically.
    box_f = sp.expand(
        sum(sp.diff(R**2 * (ginv * df)[i], coords[i]) for i in range(2)) / R**2
    )
    f_ss = sp.solve(sp.Eq(box_f, q * f), sp.diff(f, s, 2))[0]
    div_j = sum(sp.diff(R**2 * j_up[i], coords[i]) for i in range(2)) / R**2
    onshell = sp.expand(div_j.subs(sp.diff(f, s, 2), f_ss))

    x_sr = sp.Symbol("x_sr")
    x_rr = sp.Symbol("x_rr")
    state_subs = {
        sp.diff(f, s, R): x_sr,
        sp.diff(f, R, 2): x_rr,
        sp.diff(f, s): STATE_A,
        sp.diff(f, R): STATE_D,
        f: STATE_W,
    }
    prof_subs = {
        sp.diff(n_f, R): PROFILE_N_SLOPE,
        sp.diff(y_f, R): PROFILE_Y_SLOPE,
        n_f: PROFILE_N,
        y_f: PROFILE_Y,
        sp.diff(pot_f, R): POTENTIAL_SLOPE,
        pot_f: POTENTIAL,
    }
    bulk = sp.expand(onshell.subs(state_subs).subs(prof_subs))
    ok = sp.cancel(sp.together(bulk.coeff(x_sr))) == 0
    ok &= sp.cancel(sp.together(bulk.coeff(x_rr))) == 0
    bulk = bulk.subs({x_sr: 0, x_rr: 0})

    mono = _poly_coeffs_3(bulk, STATE_W, STATE_A, STATE_D)
    frozen = redshift_bulk_form()
    derived_bulk = {
        "ww": mono(2, 0, 0), "aa": mono(0, 2, 0),
        "ad": mono(0, 1, 1), "dd": mono(0, 0, 2),
    }
    for key, expr in derived_bulk.items():
        ok &= sp.cancel(sp.together(expr - frozen[key])) == 0
    ok &= sp.cancel(sp.together(mono(1, 1, 0))) == 0
    ok &= sp.cancel(sp.together(mono(1, 0, 1))) == 0

    # Static Killing multiplier: bulk term vanishes identically.
    killing = {PROFILE_N: 1, PROFILE_Y: 0,
               PROFILE_N_SLOPE: 0, PROFILE_Y_SLOPE: 0}
    ok &= sp.cancel(sp.together(bulk.subs(killing))) == 0

    # Contracted energy densities.
    nn = sp.expand((nvec.T * g * nvec)[0, 0])
    jnn = (df.T * nvec)[0, 0] ** 2 - nn * (grad2 + q * f**2) / 2
    jnn = sp.expand(jnn.subs(state_subs).subs(prof_subs))
    mono_e = _poly_coeffs_3(jnn, STATE_W, STATE_A, STATE_D)
    frozen_e = redshift_energy_form()
    for key, (i, j, k) in {
        "ww": (2, 0, 0), "aa": (0, 2, 0), "ad": (0, 1, 1), "dd": (0, 0, 2),
    }.items():
        ok &= sp.cancel(sp.together(mono_e(i, j, k) - frozen_e[key])) == 0
    frozen_t = t_energy_form()
    for key, (i, j, k) in {
        "ww": (2, 0, 0), "aa": (0, 2, 0), "ad": (0, 1, 1), "dd": (0, 0, 2),
    }.items():
        reduced = sp.cancel(sp.together(
            frozen_e[key].subs({PROFILE_N: 1, PROFILE_Y: 0}) - frozen_t[key]
        ))
        ok &= reduced == 0

    # Graph-slice flux density: lowered static-chart components are
    # J_t = J_s and J_r* = mu J_s + A J_r, and the spacelike-graph density
    # with slope h' is J_t + h' J_r*.  Trade the chart state for the slice
    # state via d = (e - (h' + mu) a)/A.
    hp = GRAPH_SLOPE
    dens = j_low[0] * (1 + hp * mu) + hp * a2 * j_low[1]
    dens = dens.subs(state_subs).subs(prof_subs)
    dens = sp.expand(dens.subs(STATE_D, (STATE_E - (hp + mu) * STATE_A) / a2))
    mono_g = _poly_coeffs_3(dens, STATE_W, STATE_A, STATE_E)
    frozen_g = graph_flux_form()
    for key, (i, j, k) in {
        "ww": (2, 0, 0), "aa": (0, 2, 0), "ae": (0, 1, 1), "ee": (0, 0, 2),
    }.items():
        ok &= sp.cancel(sp.together(mono_g(i, j, k) - frozen_g[key])) == 0
    ok &= sp.cancel(sp.together(mono_g(1, 1, 0))) == 0
    ok &= sp.cancel(sp.together(mono_g(1, 0, 1))) == 0

    # Flat-slice reduction for the static multiplier: the flux density at
    # h' = 0, (n, y) = (1, 0) is the standard energy density in (w, a, e).
    flat = {GRAPH_SLOPE: 0, PROFILE_N: 1, PROFILE_Y: 0}
    target = (
        _HALF * STATE_A**2 + _HALF * STATE_E**2
        + a2 / 2 * (ANGULAR / R**2 + POTENTIAL) * STATE_W**2
    )
    flat_dens = sum(
        frozen_g[key].subs(flat) * monexpr
        for key, monexpr in {
            "ww": STATE_W**2, "aa": STATE_A**2,
            "ae": STATE_A * STATE_E, "ee": STATE_E**2,
        }.items()
    )
    ok &= sp.cancel(sp.together(sp.expand(flat_dens - target))) == 0

    details = {
        "second_derivatives": "cancel on shell",
        "bulk_table": "matches divergence of the current",
        "energy_table": "matches T(N, N); (1, 0) reduces to T(T, T)",
        "flux_table": "matches graph-slice density; flat slice reduces to"
        " the static energy density",
        "killing_bulk": "identically zero",
    }
    return CheckReport("check_redshift_forms", bool(ok), details)


def check_z_split() -> CheckReport:
    """The weighted conformal-scaling density and its organized decomposition
    differ by an exact r* derivative of q(r, t) w^2, so slice integrals of
    compactly supported states agree exactly."""
    direct = z_direct_expr(weighted=True)
    dec = z_decomposed_expr()
    diff = sp.expand((direct - dec))
    mono = _poly_coeffs_3(diff, STATE_W, STATE_A, STATE_D)
    ok = True
    for i, j, k in ((0, 2, 0), (0, 1, 1), (0, 0, 2), (1, 1, 0)):
        ok &= exact_zero(mono(i, j, k) * R**2)
    # Remaining (w^2, w d) terms assemble into (1/r^2) d/dr* [q r^2 w^2]
    # evaluated with d standing for the r* derivative of w.
    q_weight = mono(1, 0, 1) / 2
    residual = mono(2, 0, 0) - tortoise_derivative(q_weight * R**2) / R**2
    ok &= exact_zero(residual * R**3)

    # Unweighted density at t = 0 is (r*^2 / 2) times the static density.
    rs = tortoise_expr()
    a2 = lapse_squared_expr()
    static_dens = (
        _HALF * STATE_A**2 + _HALF * STATE_D**2
        + a2 / 2 * (ANGULAR / R**2 + POTENTIAL) * STATE_W**2
    )
    anchor = sp.expand(
        z_direct_expr(weighted=False).subs(T, 0) - rs**2 / 2 * static_dens
    )
    ok &= exact_zero(anchor)

    details = {
        "boundary_weight": "q = (wd coefficient)/2, certified against the"
        " w^2 coefficient via the exact r* derivative",
        "time_zero_anchor": "direct density at t = 0 equals (r*^2/2) times"
        " the static density",
    }
    return CheckReport("check_z_split", bool(ok), details)


# ---------------------------------------------------------------------------
# suite driver and report output


def run_all(
    *,
    spin2_numerator: Sequence[int] | None = None,
    post_numerator: Sequence[int] | None = None,
    with_quadrature: bool = True,
) -> list[CheckReport]:
    """Run every check; numerator overrides support corruption testing."""
    reports = [
        check_f_identities(),
        check_base_coefficient(spin2_numerator),
        check_post_poincare(post_numerator),
        check_slab_identity(),
        check_reduction_identity(),
        check_static_dipole(),
        check_scaling_coefficient(),
        check_stress_identity(),
        check_redshift_forms(),
        check_z_split(),
        check_kerr_kernel(),
        check_ladder_constants(),
        check_sign_facts(),
    ]
    if with_quadrature:
        reports.insert(3, check_poincare_constants())
    return reports


def report_as_dict(reports: list[CheckReport]) -> dict:
    return {
        "schema": "axialwave.identities/1",
        "all_passed": all(r.passed for r in reports),
        "checks": [
            {"name": r.name, "passed": r.passed, "details": r.details}
            for r in reports
        ],
    }


def write_report(path, reports: list[CheckReport]) -> None:
    payload = report_as_dict(reports)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
