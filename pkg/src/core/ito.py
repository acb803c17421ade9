"""Itô product formulas for kernel processes, checked against dense algebra.

Every right-hand side is assembled in the kernel flavor (germ products fed
to the single counting integral) and represented once with ε; every
left-hand side is computed from dense matrices.
"""

import logging
import time
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np

from src.core.calculus import (KernelProcess, SingleIntegrand, canonical_measure, corner_residual,
                               germ, is_q_adapted, q_adapted_projection, q_commutator_residual,
                               single_counting_integral, tensor_point, x_free_part)
from src.core.chainspace import PointSpace, key_input_chain, key_output_chain
from src.core.ensembles import as_rng, random_initial, random_kernel, random_vector
from src.core.fock import (FockOperator, FockVector, QField, frobenius_distance, point_evaluation,
                           restrict_free)
from src.core.germs import (CIRCLE, MINUS, PLUS, GermMatrix, dagger, germ_product)
from src.core.kernel import (Kernel, ampliation_kernel, kernel_product, star_adjoint, unit_kernel)
from src.core.representation import epsilon
from src.models.reports import ItoReport
from src.utils.errors import PreconditionError

logger = logging.getLogger(__name__)

DEFAULT_TOLERANCE = 1e-9


def _points_before(space: PointSpace, t: float) -> List[int]:
    return [p.index for p in space.points if p.time < t]


def _off_corner_integrand(space: PointSpace, germs: Dict[int, GermMatrix]) -> SingleIntegrand:
    return SingleIntegrand.from_germs(germs, space)


def _dense_increment(process: KernelProcess, t: float, order: str) -> FockOperator:
    """ε(T_t)ε(T_t)* − ε(T_0)ε(T_0)* for order 'TT*', the reverse order for 'T*T'."""
    def square(kernel: Kernel) -> FockOperator:
        op = epsilon(kernel)
        return op.compose(op.adjoint()) if order == 'TT*' else op.adjoint().compose(op)
    return square(process.at(t)) - square(process.at_level(0))


def _operator_scale(op: FockOperator) -> float:
    return max(1.0, op.norm())


# Strong form

def strong_ito_germs(process: KernelProcess, x: int, order: str = 'TT*') -> Tuple[GermMatrix, GermMatrix]:
    """(𝐓₊𝐓₊‡ − 𝐓𝐓‡, 𝐓𝐃‡ + 𝐃𝐓‡ + 𝐃𝐃‡) at x, or the ‡-first order for 'T*T'."""
    g_t, g_plus, g_d = germ(process, x)
    if order == 'TT*':
        increment = germ_product(g_plus, dagger(g_plus)) - germ_product(g_t, dagger(g_t))
        expanded = (germ_product(g_t, dagger(g_d)) + germ_product(g_d, dagger(g_t))
                    + germ_product(g_d, dagger(g_d)))
    else:
        increment = germ_product(dagger(g_plus), g_plus) - germ_product(dagger(g_t), g_t)
        expanded = (germ_product(dagger(g_d), g_t) + germ_product(dagger(g_t), g_d)
                    + germ_product(dagger(g_d), g_d))
    return increment, expanded


def strong_ito_rhs(process: KernelProcess, t: float, order: str = 'TT*') -> Kernel:
    """n₀ᵗ of the germ increments, before representation."""
    space = process.space
    germs = {x: strong_ito_germs(process, x, order)[0] for x in _points_before(space, t)}
    return single_counting_integral(_off_corner_integrand(space, germs), t)


def verify_strong_ito(process: KernelProcess, t: float, tolerance: float = DEFAULT_TOLERANCE,
                      seed: int = 0, parameters: Optional[Dict] = None) -> ItoReport:
    """ε(T_t)ε(T_t)* − ε(T_0)ε(T_0)* = ε(n₀ᵗ(𝐓₊𝐓₊‡ − 𝐓𝐓‡)), in both adjoint orders."""
    started = time.perf_counter()
    space = process.space
    residuals = {}
    scale = 1.0
    for order, name in (('TT*', 'strong'), ('T*T', 'strong_reversed')):
        lhs = _dense_increment(process, t, order)
        rhs = epsilon(strong_ito_rhs(process, t, order))
        residuals[name] = frobenius_distance(lhs, rhs)
        scale = max(scale, _operator_scale(lhs))

    forms = 0.0
    corners = 0.0
    for x in _points_before(space, t):
        increment, expanded = strong_ito_germs(process, x)
        forms = max(forms, increment.distance(expanded))
        corners = max(corners, corner_residual(process, x))
    residuals['rhs_forms'] = forms
    residuals['corners'] = corners

    params = {'n': space.n, 'h': process.h_out, 't': t}
    params.update(parameters or {})
    report = ItoReport.from_residuals('strong_ito', seed, residuals, tolerance, scale, params)
    report.runtime_seconds = time.perf_counter() - started
    return report


# Weak form

def beta_minus(g: GermMatrix, chi_free: FockVector, chi_point: FockVector) -> FockVector:
    """D₊⁻χ + D∘⁻χ̊(x) on the reduced space."""
    op = g.represent()
    return op.role('s').apply(chi_free) + op.role('a').apply(chi_point)


def beta_circle(g: GermMatrix, chi_free: FockVector, chi_point: FockVector) -> FockVector:
    """D₊∘χ + D∘∘χ̊(x) on the reduced space with slot 𝔨ₓ⊗𝔥."""
    op = g.represent()
    return op.role('c').apply(chi_free) + op.role('n').apply(chi_point)


def _squared(v: FockVector) -> float:
    return v.inner(v).real


def weak_ito_terms(process: KernelProcess, x: int, chi: FockVector) -> Dict[str, float]:
    """Per-point contributions of the weak formula, each already multiplied by Δ(x).

    'exact' uses the corners and the increment of ‖β₋‖²; 'display' uses
    ψ = (ε(T_{t(x)})χ) on x-free chains and adds Δ(x)‖D₊⁻χ + D∘⁻χ̊‖².
    """
    space = process.space
    delta = space.weight(x)
    g_t, g_plus, g_d = (g.represent() for g in germ(process, x))
    chi_free = restrict_free(chi, x)
    chi_point = point_evaluation(chi, x)

    corner_applied = g_t.corner().apply(chi_free)
    minus_d = beta_minus(g_d, chi_free, chi_point)
    circle_d = beta_circle(g_d, chi_free, chi_point)
    circle_t = beta_circle(g_t, chi_free, chi_point)
    circle_terms = _squared(circle_d) + 2.0 * circle_t.inner(circle_d).real

    exact = (2.0 * corner_applied.inner(minus_d).real + circle_terms
             + delta * (_squared(beta_minus(g_plus, chi_free, chi_point))
                        - _squared(beta_minus(g_t, chi_free, chi_point))))

    psi = restrict_free(epsilon(process.at(space.time(x))).apply(chi), x)
    display = 2.0 * psi.inner(minus_d).real + circle_terms + delta * _squared(minus_d)
    return {'exact': delta * exact, 'display': delta * display}


def weak_ito_rhs(process: KernelProcess, t: float, chi: FockVector) -> Tuple[float, float]:
    exact = display = 0.0
    for x in _points_before(process.space, t):
        terms = weak_ito_terms(process, x, chi)
        exact += terms['exact']
        display += terms['display']
    return exact, display


def weak_ito_lhs(process: KernelProcess, t: float, chi: FockVector) -> float:
    """‖ε(T_t)χ‖² − ‖ε(T_0)χ‖²."""
    later = epsilon(process.at(t)).apply(chi)
    start = epsilon(process.at_level(0)).apply(chi)
    return _squared(later) - _squared(start)


def multiplication_table(process: KernelProcess, x: int) -> Dict[str, GermMatrix]:
    """𝐃‡𝐓 + 𝐓‡𝐃 + 𝐃‡𝐃 split into its corner terms, its pure 𝐃 terms, its mixed
    terms and the point-mass correction; the four germs sum to the full product.
    """
    g_t, g_plus, g_d = germ(process, x)
    space = process.space

    def part(g: GermMatrix, role: str) -> Kernel:
        return g.role(role)

    def mul(a: Kernel, b: Kernel) -> Kernel:
        return kernel_product(a, b)

    def st(k: Kernel) -> Kernel:
        return star_adjoint(k)

    corner = g_t.corner()
    d = {role: part(g_d, role) for role in 'sacn'}
    tt = {role: part(g_t, role) for role in 'sacn'}
    tp = {role: part(g_plus, role) for role in 'sacn'}
    delta = space.weight(x)

    first = {
        (MINUS, CIRCLE): mul(st(corner), d['a']),
        (MINUS, PLUS): mul(st(corner), d['s']) + mul(st(d['s']), corner),
        (CIRCLE, PLUS): mul(st(d['a']), corner),
    }
    second = {
        (MINUS, CIRCLE): mul(st(d['c']), d['n']),
        (MINUS, PLUS): mul(st(d['c']), d['c']),
        (CIRCLE, CIRCLE): mul(st(d['n']), d['n']),
        (CIRCLE, PLUS): mul(st(d['n']), d['c']),
    }
    third = {
        (MINUS, CIRCLE): mul(st(d['c']), tt['n']) + mul(st(tt['c']), d['n']),
        (MINUS, PLUS): mul(st(d['c']), tt['c']) + mul(st(tt['c']), d['c']),
        (CIRCLE, CIRCLE): mul(st(d['n']), tt['n']) + mul(st(tt['n']), d['n']),
        (CIRCLE, PLUS): mul(st(d['n']), tt['c']) + mul(st(tt['n']), d['c']),
    }
    point_mass = {
        (MINUS, CIRCLE): (mul(st(tp['s']), tp['a']) - mul(st(tt['s']), tt['a'])) * delta,
        (MINUS, PLUS): (mul(st(tp['s']), tp['s']) - mul(st(tt['s']), tt['s'])) * delta,
        (CIRCLE, CIRCLE): (mul(st(tp['a']), tp['a']) - mul(st(tt['a']), tt['a'])) * delta,
        (CIRCLE, PLUS): (mul(st(tp['a']), tp['s']) - mul(st(tt['a']), tt['s'])) * delta,
    }
    h = g_t.h
    return {name: GermMatrix(space, x, entries, h=h)
            for name, entries in (('first', first), ('second', second), ('third', third),
                                  ('point_mass', point_mass))}


def multiplication_table_residual(process: KernelProcess, x: int) -> float:
    g_t, _, g_d = germ(process, x)
    product = (germ_product(dagger(g_d), g_t) + germ_product(dagger(g_t), g_d)
               + germ_product(dagger(g_d), g_d))
    parts = multiplication_table(process, x)
    assembled = parts['first'] + parts['second'] + parts['third'] + parts['point_mass']
    return product.distance(assembled)


def verify_weak_ito(process: KernelProcess, t: float, chi: FockVector,
                    tolerance: float = DEFAULT_TOLERANCE, seed: int = 0,
                    parameters: Optional[Dict] = None) -> ItoReport:
    """‖ε(T_t)χ‖² − ‖ε(T_0)χ‖² against the per-point weak formula."""
    started = time.perf_counter()
    space = process.space
    lhs = weak_ito_lhs(process, t, chi)
    exact, display = weak_ito_rhs(process, t, chi)

    # ⟨χ, (ε(T_t)ε(T_t)* − ε(T_0)ε(T_0)*)χ⟩ is the weak increment of the ⋆-process
    strong_increment = _dense_increment(process, t, 'TT*')
    strong_side = chi.inner(strong_increment.apply(chi)).real
    star_exact, _ = weak_ito_rhs(process.star(), t, chi)

    residuals = {
        'weak': abs(lhs - exact),
        'weak_display': abs(lhs - display),
        'strong_weak_consistency': abs(strong_side - star_exact),
        'multiplication_table': max((multiplication_table_residual(process, x)
                                     for x in _points_before(space, t)), default=0.0),
    }
    scale = max(1.0, abs(lhs), abs(strong_side), chi.norm() ** 2)
    params = {'n': space.n, 'h': process.h_out, 't': t}
    params.update(parameters or {})
    report = ItoReport.from_residuals('weak_ito', seed, residuals, tolerance, scale, params)
    report.runtime_seconds = time.perf_counter() - started
    return report


# Q-adapted strong form

def q_closed_form(process: KernelProcess, field: QField, x: int) -> GermMatrix:
    """𝐓‡𝐓 for a Q-adapted process: diag(T*T, T*T ⊗ Q*Q(x), T*T) with T the x-free part."""
    space = process.space
    corner = x_free_part(process.at_level(space.position(x)), x)
    square = kernel_product(star_adjoint(corner), corner)
    q = field.at(space, x)
    middle = tensor_point(square, q.conj().T @ q, x)
    entries = {(MINUS, MINUS): square, (CIRCLE, CIRCLE): middle, (PLUS, PLUS): square}
    return GermMatrix(space, x, entries, h=process.h_in)


def q_adapted_germ(process: KernelProcess, field: QField, x: int) -> GermMatrix:
    """T ⊗ 𝐐(x) = diag(T, T ⊗ Q(x), T) for the x-free part T of T_{t(x)}."""
    space = process.space
    corner = x_free_part(process.at_level(space.position(x)), x)
    middle = tensor_point(corner, field.at(space, x), x)
    entries = {(MINUS, MINUS): corner, (CIRCLE, CIRCLE): middle, (PLUS, PLUS): corner}
    return GermMatrix(space, x, entries, h=process.h_out)


def check_q_adapted(process: KernelProcess, field: QField, atol: float = 1e-10):
    """Raise PreconditionError unless the process is Q-adapted at every cut."""
    space = process.space
    for level in range(space.n + 1):
        result = is_q_adapted(process.at_level(level), field, space.level_time(level), atol)
        if not result:
            raise PreconditionError(
                f"process is not Q-adapted at level {level}: table {result.witness} deviates by {result.deviation:.3g}")


def product_closure_witness(space: PointSpace, seed, scale: complex = 2.0) -> Optional[str]:
    """A table where T⋆·T fails to be Q-adapted for Q = scale·I although T is.

    T is built Q-adapted at the first point with a nonzero empty-table block.
    """
    rng = as_rng(seed)
    field = QField.scalar(space, scale)
    t = space.level_time(0)
    base = random_kernel(space, rng) + unit_kernel(space)
    adapted = q_adapted_projection(base, field, t)
    square = kernel_product(star_adjoint(adapted), adapted)
    result = is_q_adapted(square, field, t)
    return None if result else result.witness


def verify_q_adapted_ito(process: KernelProcess, field: QField, t: float,
                         tolerance: float = DEFAULT_TOLERANCE, seed: int = 0,
                         chi: Optional[FockVector] = None,
                         parameters: Optional[Dict] = None) -> ItoReport:
    """ε(T_t)*ε(T_t) − ε(T_0)*ε(T_0) = ε(n₀ᵗ(𝐓₊‡𝐓₊ − T*T ⊗ 𝐐‡𝐐)) for Q-adapted T."""
    started = time.perf_counter()
    space = process.space
    params = {'n': space.n, 'h': process.h_out, 't': t, 'q_projector': field.is_projector()}
    params.update(parameters or {})
    try:
        check_q_adapted(process, field)
    except PreconditionError as e:
        logger.info(f"Skipping Q-adapted check: {e}")
        return ItoReport.skip('q_adapted_ito', seed, tolerance, str(e), params)

    germs = {}
    closed = 0.0
    factorization = 0.0
    for x in _points_before(space, t):
        g_t, g_plus, _ = germ(process, x)
        plus_square = germ_product(dagger(g_plus), g_plus)
        closed_form = q_closed_form(process, field, x)
        germs[x] = plus_square - closed_form
        closed = max(closed, germ_product(dagger(g_t), g_t).distance(closed_form))
        factorization = max(factorization, g_t.distance(q_adapted_germ(process, field, x)))

    lhs = _dense_increment(process, t, 'T*T')
    rhs = epsilon(single_counting_integral(_off_corner_integrand(space, germs), t))
    residuals = {
        'corollary': frobenius_distance(lhs, rhs),
        'germ_closed_form': closed,
        'germ_factorization': factorization,
    }
    if chi is not None:
        residuals['q_commutator'] = max(
            (q_commutator_residual(process, field, x, chi) for x in space.ids), default=0.0)

    projector = field.is_projector()
    closure = all(bool(is_q_adapted(kernel_product(star_adjoint(process.at_level(k)), process.at_level(k)),
                                    field, space.level_time(k)))
                  for k in range(space.n + 1))
    params['product_q_adapted'] = closure
    if projector:
        residuals['product_closure'] = 0.0 if closure else 1.0

    report = ItoReport.from_residuals('q_adapted_ito', seed, residuals, tolerance,
                                      _operator_scale(lhs), params)
    report.runtime_seconds = time.perf_counter() - started
    return report


# Scalar Wiener case

def unit_split_integrand(space: PointSpace, roles: Iterable[str] = ('c', 'a')) -> SingleIntegrand:
    """D(x_ν^μ, ·) = Î on the reduced space for the given roles at every point."""
    integrand = SingleIntegrand(space)
    for x in space.ids:
        for role in roles:
            integrand.set(role, x, unit_kernel(space.without(x)))
    return integrand


def wiener_measure(space: PointSpace, window: Tuple[float, float]) -> FockOperator:
    """ŵ(△) = Λ∘₊(△) + Λ₋∘(△) built from unit point kernels."""
    integrand = unit_split_integrand(space)
    return canonical_measure('c', integrand, window) + canonical_measure('a', integrand, window)


def wiener_windows(space: PointSpace) -> List[Tuple[float, float]]:
    """Half-open windows between consecutive, and non-consecutive, cut times."""
    times = [p.time for p in space.points]
    cuts = sorted({0.0, *times, (times[-1] if times else 0.0) + 1.0})
    return [(cuts[i], cuts[j]) for i in range(len(cuts)) for j in range(i + 1, len(cuts))]


def wiener_process(space: PointSpace, seed, degree: int, adapted: bool = False,
                   density: float = 0.5, magnitude: float = 1.0) -> KernelProcess:
    """T_0 = A ⊗ I plus the counting integral of D∘⁻ = K = D₊∘.

    In the adapted case every K(x) is I-adapted at t(x) on the reduced space.
    """
    rng = as_rng(seed)
    h = space.initial_dim
    initial = ampliation_kernel(space, random_initial(rng, h, magnitude))
    integrand = SingleIntegrand(space)
    for x in space.ids:
        reduced = space.without(x)
        k = random_kernel(reduced, rng, density, magnitude, max_points=degree)
        if adapted:
            k = q_adapted_projection(k, QField.identity(reduced), space.time(x))
        integrand.set('a', x, k)
        integrand.set('c', x, k)
    return KernelProcess.from_single_integrand(initial, integrand)


def wiener_split_terms(process: KernelProcess, x: int, chi: FockVector) -> Dict[str, float]:
    """First-order weak term at x and its split into adapted, commutator and point-mass parts.

    All values are before the Δ(x) factor.
    """
    space = process.space
    delta = space.weight(x)
    g_t, _, g_d = germ(process, x)
    chi_free = restrict_free(chi, x)
    chi_point = point_evaluation(chi, x)
    k = epsilon(g_d.role('a'))
    corner = g_t.corner()

    psi = restrict_free(epsilon(process.at(space.time(x))).apply(chi), x)
    gradient = beta_circle(g_t, chi_free, chi_point)
    first_order = 2.0 * (psi.inner(k.apply(chi_point)).real + gradient.inner(k.apply(chi_free)).real)

    identity = np.eye(space.multiplicity(x))
    ampliated = epsilon(tensor_point(corner, identity, x)).apply(chi_point)
    adapted = 2.0 * (epsilon(corner).apply(chi_free).inner(k.apply(chi_point)).real
                     + ampliated.inner(k.apply(chi_free)).real)
    commutator_vector = gradient - ampliated
    commutator = 2.0 * commutator_vector.inner(k.apply(chi_free)).real
    point_mass = 2.0 * delta * beta_minus(g_t, chi_free, chi_point).inner(k.apply(chi_point)).real
    return {
        'first_order': first_order,
        'adapted': adapted,
        'commutator': commutator,
        'point_mass': point_mass,
        'commutator_norm': commutator_vector.norm(),
    }


def wiener_suite(space: PointSpace, degree: int, seed: int = 0, tolerance: float = DEFAULT_TOLERANCE,
                 commutator_tolerance: float = 1e-12, rng: Optional[np.random.Generator] = None,
                 density: float = 0.5, magnitude: float = 1.0) -> ItoReport:
    """Commuting Wiener measures and the split of the weak formula for scalar points."""
    started = time.perf_counter()
    params = {'n': space.n, 'h': space.initial_dim, 'degree': degree}
    if any(p.multiplicity != 1 for p in space.points):
        raise PreconditionError("the Wiener case needs d(x) = 1 at every point")
    rng = as_rng(seed) if rng is None else rng

    windows = wiener_windows(space)
    measures = [wiener_measure(space, w) for w in windows]
    commutator = 0.0
    self_adjoint = 0.0
    for i, a in enumerate(measures):
        self_adjoint = max(self_adjoint, frobenius_distance(a, a.adjoint()))
        for b in measures[i + 1:]:
            commutator = max(commutator, frobenius_distance(a.compose(b), b.compose(a)))

    chi = random_vector(space, rng)
    general = wiener_process(space, rng, degree, adapted=False, density=density, magnitude=magnitude)
    adapted = wiener_process(space, rng, degree, adapted=True, density=density, magnitude=magnitude)

    split = 0.0
    for x in space.ids:
        terms = wiener_split_terms(general, x, chi)
        split += space.weight(x) * (terms['first_order']
                                    - terms['adapted'] - terms['commutator'] - terms['point_mass'])
    adapted_commutator = max((wiener_split_terms(adapted, x, chi)['commutator_norm'] for x in space.ids),
                             default=0.0)
    weak = verify_weak_ito(general, np.inf, chi, tolerance, seed)

    residuals = {
        'window_commutator': commutator,
        'self_adjoint': self_adjoint,
        'split': abs(split),
        'adapted_commutator': adapted_commutator,
        'weak': weak.residuals['weak'],
    }
    # commutators are exact up to rounding, so they get the tight tolerance
    passed_commutators = commutator <= commutator_tolerance and self_adjoint <= commutator_tolerance
    scale = max(1.0, chi.norm() ** 2)
    report = ItoReport.from_residuals('wiener', seed, residuals, tolerance, scale, params)
    report.passed = report.passed and passed_commutators
    report.runtime_seconds = time.perf_counter() - started
    return report


def conjugate_initial(kernel: Kernel, u: np.ndarray) -> Kernel:
    """(I ⊗ U) T(𝛝) (I ⊗ U*) on every block, U unitary on 𝔥."""
    space = kernel.space
    blocks = {}
    for key, block in kernel.blocks.items():
        left = np.kron(np.eye(space.chain_dim(key_output_chain(space, key))), u)
        right = np.kron(np.eye(space.chain_dim(key_input_chain(space, key))), u.conj().T)
        blocks[key] = left @ block @ right
    return Kernel(space, blocks, kernel.h_out, kernel.h_in)


def conjugate_process(process: KernelProcess, u: np.ndarray) -> KernelProcess:
    return KernelProcess(process.space, [conjugate_initial(k, u) for k in process.levels])
