"""Verification suites: each draws seeded objects and returns one ItoReport."""

import logging
import math
import time
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional

import numpy as np

from src.core.calculus import (KernelProcess, canonical_integrand, canonical_measure, counting_integral,
                               integrand_from_single, integrand_tensor_q, is_null_integrand, is_q_adapted,
                               lemma2_norm_bound, meyer_transform, mobius_transform,
                               operator_multiple_integral, operator_single_integral,
                               q_meyer_process_transform, q_mobius_process_inverse,
                               single_counting_integral)
from src.core.chainspace import PointSpace, fubini_residual, measure_sum
from src.core.ensembles import (QFieldSpec, make_q_field, q_adapted_process, random_chain_function,
                                random_integrand, random_kernel, random_quadruple,
                                random_single_integrand, random_vector)
from src.core.fock import QField, frobenius_distance, weighted_operator_norm
from src.core.ito import (conjugate_process, product_closure_witness, verify_q_adapted_ito,
                          verify_strong_ito, verify_weak_ito, wiener_suite)
from src.core.kernel import (exponential_bound, exponential_kernel, kernel_product, projective_norm,
                             relative_norm, split_pair_key, star_adjoint, unit_kernel)
from src.core.representation import (epsilon, epsilon_adjoint_residual, epsilon_homomorphism_residual,
                                     epsilon_unit_residual)
from src.models.reports import ItoReport
from src.utils.errors import PreconditionError

logger = logging.getLogger(__name__)

DEFAULT_TOLERANCES = {
    'fubini': 1e-12,
    'epsilon_adjoint': 1e-12,
    'epsilon_homomorphism': 1e-10,
    'meyer_mobius': 1e-12,
    'intertwining': 1e-10,
    'norms': 1e-12,
    'lemma2': 1e-12,
    'strong_ito': 1e-9,
    'weak_ito': 1e-9,
    'q_adapted_ito': 1e-9,
    'wiener': 1e-9,
}

SUITE_NAMES = tuple(DEFAULT_TOLERANCES)
ITO_SUITES = ('strong_ito', 'weak_ito', 'q_adapted_ito', 'wiener')

DESCRIPTIONS = {
    'fubini': 'Sum over sub-chains equals the double sum over disjoint pairs',
    'epsilon_adjoint': 'ε(T)* = ε(T⋆) and ε(Î) = I',
    'epsilon_homomorphism': 'ε(X)ε(Y) = ε(X·Y), associativity and ⋆ antimultiplicativity',
    'meyer_mobius': 'Meyer/Möbius inversion, Q-Meyer process round trip, null integrands',
    'intertwining': 'ε∘ν₀ᵗ = 𝚤₀ᵗ∘ε, ε∘n₀ᵗ = i₀ᵗ∘ε and the canonical measures',
    'norms': 'Relative, projective and exponential kernel norm estimates',
    'lemma2': 'Relative bound of a counting integral from its integrand bound',
    'strong_ito': 'Non-adapted strong Itô formula in both adjoint orders',
    'weak_ito': 'Weak Itô formula, multiplication table, strong/weak consistency',
    'q_adapted_ito': 'Q-adapted strong Itô formula and product closure',
    'wiener': 'Commuting Wiener measures and the weak split for scalar points',
}


@dataclass
class SuiteContext:
    """Everything a suite needs besides its random stream."""
    space: PointSpace
    q_spec: QFieldSpec = field(default_factory=QFieldSpec)
    density: float = 0.5
    magnitude: float = 1.0
    degree: int = 2
    tolerances: Dict[str, float] = field(default_factory=dict)
    ito_tolerance: float = 1e-9

    def tolerance(self, suite: str) -> float:
        if suite in self.tolerances:
            return self.tolerances[suite]
        if suite in ITO_SUITES:
            return self.ito_tolerance
        return DEFAULT_TOLERANCES[suite]

    def parameters(self) -> Dict[str, object]:
        return {
            'n': self.space.n,
            'initial_dim': self.space.initial_dim,
            'multiplicities': [p.multiplicity for p in self.space.points],
            'weights': [p.weight for p in self.space.points],
            'q_field': self.q_spec.describe(),
        }


def _combine(suite: str, seed: int, tolerance: float, parts: Dict[str, ItoReport],
             extra: Optional[Dict[str, float]] = None, scale: float = 1.0,
             parameters: Optional[Dict] = None) -> ItoReport:
    """Merge sub-reports; the merged record passes only if every part does."""
    residuals = {}
    params = dict(parameters or {})
    for prefix, part in parts.items():
        if part.skipped:
            params[f"{prefix}_skipped"] = part.parameters.get('skip_reason')
            continue
        for name, value in part.residuals.items():
            residuals[f"{prefix}.{name}"] = value
        for name, value in part.parameters.items():
            if name not in ('n', 'h', 't'):
                params[f"{prefix}.{name}"] = value
    residuals.update(extra or {})
    report = ItoReport.from_residuals(suite, seed, residuals, tolerance, scale, params)
    report.passed = report.passed and all(p.passed for p in parts.values())
    return report


def run_fubini(ctx: SuiteContext, seed: int, rng: np.random.Generator) -> ItoReport:
    values = random_chain_function(ctx.space, rng)
    residual = fubini_residual(ctx.space, lambda u, k: values[(u, k)])
    scale = measure_sum(ctx.space, lambda chain: 1.0) * max((abs(v) for v in values.values()), default=1.0)
    return ItoReport.from_residuals('fubini', seed, {'fubini': residual}, ctx.tolerance('fubini'),
                                    scale, ctx.parameters())


def run_epsilon_adjoint(ctx: SuiteContext, seed: int, rng: np.random.Generator) -> ItoReport:
    kernel = random_kernel(ctx.space, rng, ctx.density, ctx.magnitude)
    residuals = {
        'adjoint': epsilon_adjoint_residual(kernel),
        'unit': epsilon_unit_residual(ctx.space),
        'unit_self_adjoint': star_adjoint(unit_kernel(ctx.space)).distance(unit_kernel(ctx.space)),
    }
    return ItoReport.from_residuals('epsilon_adjoint', seed, residuals, ctx.tolerance('epsilon_adjoint'),
                                    epsilon(kernel).norm(), ctx.parameters())


def run_epsilon_homomorphism(ctx: SuiteContext, seed: int, rng: np.random.Generator) -> ItoReport:
    space = ctx.space
    x = random_kernel(space, rng, ctx.density, ctx.magnitude)
    y = random_kernel(space, rng, ctx.density, ctx.magnitude)
    z = random_kernel(space, rng, ctx.density, ctx.magnitude)
    unit = unit_kernel(space)
    xy = kernel_product(x, y)
    residuals = {
        'product': epsilon_homomorphism_residual(x, y),
        'product_with_star': epsilon_homomorphism_residual(x, star_adjoint(x)),
        'associativity': kernel_product(xy, z).distance(kernel_product(x, kernel_product(y, z))),
        'star_antimultiplicative': star_adjoint(xy).distance(kernel_product(star_adjoint(y), star_adjoint(x))),
        'left_unit': kernel_product(unit, x).distance(x),
        'right_unit': kernel_product(x, unit).distance(x),
    }
    scale = epsilon(x).norm() * epsilon(y).norm() * max(1.0, epsilon(z).norm())
    return ItoReport.from_residuals('epsilon_homomorphism', seed, residuals,
                                    ctx.tolerance('epsilon_homomorphism'), scale, ctx.parameters())


def _round_trip_fields(ctx: SuiteContext, rng: np.random.Generator) -> Dict[str, QField]:
    """The configured field plus one field of every kind."""
    space = ctx.space
    specs = {
        'configured': ctx.q_spec,
        'zero': QFieldSpec('zero'),
        'identity': QFieldSpec('identity'),
        'projector': QFieldSpec('projector', rank=ctx.q_spec.rank),
        'scalar': QFieldSpec('scalar', value=2.0),
        'random': QFieldSpec('random'),
    }
    return {name: make_q_field(space, spec, rng) for name, spec in specs.items()}


def run_meyer_mobius(ctx: SuiteContext, seed: int, rng: np.random.Generator) -> ItoReport:
    space = ctx.space
    kernel = random_kernel(space, rng, ctx.density, ctx.magnitude)
    residuals = {'zero_field': meyer_transform(kernel, QField.zero(space)).distance(kernel)}
    spread = 1.0
    for name, q_field in _round_trip_fields(ctx, rng).items():
        spread = max(spread, max((float(np.linalg.norm(m, 2)) for m in q_field.matrices), default=1.0))
        residuals[f"{name}.mobius_after_meyer"] = mobius_transform(
            meyer_transform(kernel, q_field), q_field).distance(kernel)
        residuals[f"{name}.meyer_after_mobius"] = meyer_transform(
            mobius_transform(kernel, q_field), q_field).distance(kernel)
        process = q_adapted_process(space, q_field, rng, ctx.density, ctx.magnitude)
        rebuilt = q_mobius_process_inverse(q_meyer_process_transform(process, q_field), q_field)
        residuals[f"{name}.process_round_trip"] = max(a.distance(b) for a, b in zip(rebuilt, process.levels))

    integrand = random_integrand(space, rng, ctx.density * 0.5, ctx.magnitude)
    counted = KernelProcess.from_integrand(integrand)
    null = integrand - canonical_integrand(counted)
    residuals['null_integrand'] = max(counting_integral(null, space.level_time(k)).max_abs()
                                      for k in range(space.n + 1))

    detected = is_null_integrand(null, atol=1e-10)
    residuals['null_detected'] = 0.0 if detected else 1.0

    params = ctx.parameters()
    params['null_detected'] = detected
    scale = max(1.0, kernel.max_abs(), integrand.max_abs()) * (1.0 + spread) ** (2 * space.n)
    return ItoReport.from_residuals('meyer_mobius', seed, residuals, ctx.tolerance('meyer_mobius'),
                                    scale, params)


def run_intertwining(ctx: SuiteContext, seed: int, rng: np.random.Generator) -> ItoReport:
    space = ctx.space
    integrand = random_integrand(space, rng, ctx.density * 0.5, ctx.magnitude)
    single = random_single_integrand(space, rng, ctx.density, ctx.magnitude)
    kernel = random_kernel(space, rng, ctx.density, ctx.magnitude)

    multiple = single_ = measures = counting = 0.0
    for t in space.cut_times():
        multiple = max(multiple, frobenius_distance(epsilon(counting_integral(integrand, t)),
                                                    operator_multiple_integral(integrand, t)))
        represented = epsilon(single_counting_integral(single, t))
        single_ = max(single_, frobenius_distance(represented, operator_single_integral(single, t)))
        total = None
        for role in 'sacn':
            part = canonical_measure(role, single, (-math.inf, t))
            total = part if total is None else total + part
        measures = max(measures, frobenius_distance(represented, total))
        counting = max(counting, counting_integral(integrand_from_single(single), t)
                       .distance(single_counting_integral(single, t)))

    vacuum = integrand_tensor_q(kernel, QField.zero(space))
    residuals = {
        'multiple': multiple,
        'single': single_,
        'canonical_measures': measures,
        'single_as_multiple': counting,
        'vacuum_adapted': frobenius_distance(operator_multiple_integral(vacuum, math.inf), epsilon(kernel)),
    }
    scale = max(1.0, integrand.max_abs(), kernel.max_abs()) * space.fock_dim()
    return ItoReport.from_residuals('intertwining', seed, residuals, ctx.tolerance('intertwining'),
                                    scale, ctx.parameters())


def run_norms(ctx: SuiteContext, seed: int, rng: np.random.Generator) -> ItoReport:
    space = ctx.space
    x = random_kernel(space, rng, ctx.density, ctx.magnitude)
    y = random_kernel(space, rng, ctx.density, ctx.magnitude)
    alpha = random_quadruple(space, rng)
    gamma = random_quadruple(space, rng)
    q = rng.uniform(1.0, 2.0, space.n)
    r = rng.uniform(0.5, 2.0, space.n)

    product_bound = relative_norm(x, alpha) * relative_norm(y, gamma)
    product_norm = relative_norm(kernel_product(x, y), alpha.product(gamma, space))
    operator = weighted_operator_norm(epsilon(x), q + 1.0 / r)
    projective = projective_norm(x, q, r)
    capped = random_quadruple(space, rng, number_cap=q)
    bound = exponential_bound(relative_norm(x, capped), capped, r, q, space)

    values = capped.scalar
    integral = measure_sum(space, lambda chain: float(np.prod([values[space.position(p)] for p in chain])))
    product_form = float(np.prod([1.0 + p.weight * values[k] for k, p in enumerate(space.points)]))
    exponent = math.exp(sum(p.weight * values[k] for k, p in enumerate(space.points)))

    residuals = {
        'submultiplicative': max(0.0, product_norm - product_bound),
        'star_transposed': abs(relative_norm(star_adjoint(x), gamma) - relative_norm(x, gamma.transposed())),
        'operator_estimate': max(0.0, operator - projective),
        'exponential_estimate': max(0.0, projective - bound),
        'exponential_integral': abs(integral - product_form) + max(0.0, product_form - exponent),
    }
    if all(p.multiplicity == 1 for p in space.points):
        lhs = kernel_product(exponential_kernel(alpha, space), exponential_kernel(gamma, space))
        residuals['exponential_multiplicative'] = lhs.distance(exponential_kernel(alpha.product(gamma, space), space))
    scale = max(1.0, product_bound, projective, bound, exponent)
    return ItoReport.from_residuals('norms', seed, residuals, ctx.tolerance('norms'), scale, ctx.parameters())


def run_lemma2(ctx: SuiteContext, seed: int, rng: np.random.Generator) -> ItoReport:
    space = ctx.space
    integrand = random_integrand(space, rng, ctx.density * 0.5, ctx.magnitude)
    beta = random_quadruple(space, rng)
    gamma = random_quadruple(space, rng)
    c = 0.0
    for key, block in integrand.blocks.items():
        upsilon, kappa = split_pair_key(key)
        norm = float(np.linalg.norm(block, 2)) if block.size else 0.0
        c = max(c, norm / (beta.of_key(upsilon) * gamma.of_key(kappa)))

    excess = 0.0
    for t in space.cut_times():
        result = lemma2_norm_bound(integrand, beta, gamma, c, t)
        excess = max(excess, max(0.0, result.lhs - result.rhs))
    params = ctx.parameters()
    params['c'] = c
    return ItoReport.from_residuals('lemma2', seed, {'bound_excess': excess}, ctx.tolerance('lemma2'),
                                    max(1.0, c), params)


def run_strong_ito(ctx: SuiteContext, seed: int, rng: np.random.Generator) -> ItoReport:
    space = ctx.space
    tolerance = ctx.tolerance('strong_ito')
    general = KernelProcess.from_integrand(random_integrand(space, rng, ctx.density * 0.5, ctx.magnitude))
    adapted = q_adapted_process(space, QField.identity(space), rng, ctx.density, ctx.magnitude)
    parts = {
        'multiple': verify_strong_ito(general, math.inf, tolerance, seed),
        'adapted': verify_strong_ito(adapted, math.inf, tolerance, seed),
    }

    h = space.initial_dim
    unitary, _ = np.linalg.qr(rng.normal(size=(h, h)) + 1j * rng.normal(size=(h, h)))
    conjugated = verify_strong_ito(conjugate_process(general, unitary), math.inf, tolerance, seed)
    extra = {'unitary_invariance': abs(conjugated.residuals['strong'] - parts['multiple'].residuals['strong'])}
    return _combine('strong_ito', seed, tolerance, parts, extra, parameters=ctx.parameters())


def run_weak_ito(ctx: SuiteContext, seed: int, rng: np.random.Generator) -> ItoReport:
    space = ctx.space
    tolerance = ctx.tolerance('weak_ito')
    general = KernelProcess.from_integrand(random_integrand(space, rng, ctx.density * 0.5, ctx.magnitude))
    single = KernelProcess.from_single_integrand(
        random_kernel(space, rng, ctx.density, ctx.magnitude),
        random_single_integrand(space, rng, ctx.density, ctx.magnitude))
    chi = random_vector(space, rng)
    parts = {
        'multiple': verify_weak_ito(general, math.inf, chi, tolerance, seed),
        'single': verify_weak_ito(single, math.inf, chi, tolerance, seed),
    }
    return _combine('weak_ito', seed, tolerance, parts, parameters=ctx.parameters())


def run_q_adapted_ito(ctx: SuiteContext, seed: int, rng: np.random.Generator) -> ItoReport:
    space = ctx.space
    tolerance = ctx.tolerance('q_adapted_ito')
    q_field = make_q_field(space, ctx.q_spec, rng)
    chi = random_vector(space, rng)
    process = q_adapted_process(space, q_field, rng, ctx.density, ctx.magnitude)
    identity = QField.identity(space)
    hp = q_adapted_process(space, identity, rng, ctx.density, ctx.magnitude)
    parts = {
        'field': verify_q_adapted_ito(process, q_field, math.inf, tolerance, seed, chi),
        'identity': verify_q_adapted_ito(hp, identity, math.inf, tolerance, seed, chi),
    }
    tensored = integrand_tensor_q(random_kernel(space, rng, ctx.density, ctx.magnitude), q_field)
    failures = [k for k in range(space.n + 1)
                if not is_q_adapted(counting_integral(tensored, space.level_time(k)), q_field,
                                    space.level_time(k))]
    extra = {'tensor_integral_adapted': float(len(failures))}
    params = ctx.parameters()
    if space.n:
        witness = product_closure_witness(space, rng)
        params['non_projector_witness'] = witness
        extra['non_projector_witness'] = 0.0 if witness is not None else 1.0
    return _combine('q_adapted_ito', seed, tolerance, parts, extra, parameters=params)


def run_wiener(ctx: SuiteContext, seed: int, rng: np.random.Generator) -> ItoReport:
    report = wiener_suite(ctx.space, ctx.degree, seed, ctx.tolerance('wiener'), rng=rng,
                          density=ctx.density, magnitude=ctx.magnitude)
    report.parameters.update(ctx.parameters())
    return report


SUITES: Dict[str, Callable[[SuiteContext, int, np.random.Generator], ItoReport]] = {
    'fubini': run_fubini,
    'epsilon_adjoint': run_epsilon_adjoint,
    'epsilon_homomorphism': run_epsilon_homomorphism,
    'meyer_mobius': run_meyer_mobius,
    'intertwining': run_intertwining,
    'norms': run_norms,
    'lemma2': run_lemma2,
    'strong_ito': run_strong_ito,
    'weak_ito': run_weak_ito,
    'q_adapted_ito': run_q_adapted_ito,
    'wiener': run_wiener,
}


def run_suite(name: str, ctx: SuiteContext, seed: int, rng: np.random.Generator) -> ItoReport:
    """Run one suite on one seed; precondition failures become skipped records."""
    if name not in SUITES:
        raise PreconditionError(f"unknown suite {name!r}")
    started = time.perf_counter()
    try:
        report = SUITES[name](ctx, seed, rng)
    except PreconditionError as e:
        logger.info(f"Suite {name} skipped for seed {seed}: {e}")
        report = ItoReport.skip(name, seed, ctx.tolerance(name), str(e), ctx.parameters())
    report.runtime_seconds = time.perf_counter() - started
    return report


def suite_names(selected: Optional[List[str]] = None) -> List[str]:
    if not selected:
        return list(SUITE_NAMES)
    unknown = [s for s in selected if s not in SUITES]
    if unknown:
        raise PreconditionError(f"unknown suites: {', '.join(unknown)}")
    return [s for s in SUITE_NAMES if s in selected]
