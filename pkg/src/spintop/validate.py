"""Self-check battery behind the `validate` CLI command.

Every check returns a record with a name, the tolerance it enforces, the
measured value, and a verdict, so failures are diagnosable from the JSON
report alone.  Randomized checks draw from a seeded generator; the seed
changes the sampled inputs but must never change a verdict.
"""

from __future__ import annotations

import numpy as np

from . import localizer as loc
from .liouville import (
    ModelParameters,
    build_superoperator,
    build_superoperator_vectorized,
    extract_hoppings,
    spectrum,
    steady_state,
    tensor_basis_superoperator_from_vectorized,
)
from .spincore import (
    SpinRepresentation,
    build_spin_operators,
    build_tensor_basis,
    decompose,
    reconstruct,
    tensor_index,
)

__all__ = ["run_suite", "SUITES"]


def _check(name, measured, tolerance, passed=None, detail=None):
    if passed is None:
        passed = bool(measured <= tolerance)
    rec = {
        "name": name,
        "measured": float(measured),
        "tolerance": float(tolerance),
        "passed": bool(passed),
    }
    if detail:
        rec["detail"] = detail
    return rec


def _half_integers(j_max):
    return [k / 2 for k in range(1, int(round(2 * j_max)) + 1)]


def suite_algebra(config) -> list[dict]:
    """Tensor-algebra identities for every j up to j_max."""
    tol = 1e-10
    checks = []
    rng = np.random.default_rng(config["seed"])
    for j in _half_integers(config["j_max"]):
        rep = SpinRepresentation(j)
        ops = build_spin_operators(rep)
        basis = build_tensor_basis(rep)
        comm = ops.jx @ ops.jy - ops.jy @ ops.jx - 1j * ops.jz
        casimir = (
            ops.jx @ ops.jx + ops.jy @ ops.jy + ops.jz @ ops.jz
            - j * (j + 1) * np.eye(rep.dim)
        )
        checks.append(_check(f"commutator_jxjy[j={j}]", np.abs(comm).max(), tol))
        checks.append(_check(f"casimir[j={j}]", np.abs(casimir).max(), tol))
        checks.append(_check(f"gram_identity[j={j}]", basis.gram_residual(), tol))
        conj_err = 0.0
        ladder_err = 0.0
        for k in range(rep.n_spins + 1):
            for q in range(-k, k + 1):
                t = basis.tensor(k, q)
                conj_err = max(
                    conj_err,
                    np.abs(t.conj().T - (-1) ** q * basis.tensor(k, -q)).max(),
                )
                ladder_err = max(
                    ladder_err,
                    np.abs(ops.jz @ t - t @ ops.jz - q * t).max(),
                )
                up = ops.jplus @ t - t @ ops.jplus
                expect = (
                    np.sqrt(k * (k + 1) - q * (q + 1)) * basis.tensor(k, q + 1)
                    if q < k else np.zeros_like(t)
                )
                ladder_err = max(ladder_err, np.abs(up - expect).max())
                down = ops.jminus @ t - t @ ops.jminus
                expect = (
                    np.sqrt(k * (k + 1) - q * (q - 1)) * basis.tensor(k, q - 1)
                    if q > -k else np.zeros_like(t)
                )
                ladder_err = max(ladder_err, np.abs(down - expect).max())
        checks.append(_check(f"conjugation_phase[j={j}]", conj_err, tol))
        checks.append(_check(f"ladder_commutators[j={j}]", ladder_err, tol))
        raw = rng.standard_normal((rep.dim, rep.dim)) + 1j * rng.standard_normal((rep.dim, rep.dim))
        herm = raw + raw.conj().T
        round_trip = np.abs(reconstruct(decompose(herm, basis), basis) - herm).max()
        checks.append(_check(f"round_trip[j={j}]", round_trip, tol))
    return checks


def suite_trace(config) -> list[dict]:
    """Row (0,0) of the superoperator vanishes for random couplings."""
    tol = 1e-12
    rng = np.random.default_rng(config["seed"])
    checks = []
    for n in (4, 10, 20):
        rep = SpinRepresentation.from_n_spins(n)
        basis = build_tensor_basis(rep)
        worst = 0.0
        for _ in range(config["samples_trace"]):
            omega, gamma = rng.uniform(0.0, 2.0, size=2)
            liouv = build_superoperator(
                rep, ModelParameters(omega=omega, gamma_rate=gamma, n_spins=n), basis
            )
            worst = max(worst, float(np.abs(liouv.m[0]).max()))
        checks.append(_check(f"trace_row_zero[N={n}]", worst, tol))
    return checks


def suite_structure(config) -> list[dict]:
    """Five-point stencil sparsity and affine parameter dependence."""
    checks = []
    rng = np.random.default_rng(config["seed"])
    for n in (4, 10, 20):
        rep = SpinRepresentation.from_n_spins(n)
        basis = build_tensor_basis(rep)
        omega, gamma = rng.uniform(0.2, 2.0, size=2)
        liouv = build_superoperator(
            rep, ModelParameters(omega=omega, gamma_rate=gamma, n_spins=n), basis
        )
        hop = extract_hoppings(liouv)
        checks.append(
            _check(
                f"stencil_residual[N={n}]",
                hop.residual_norm,
                1e-12 * liouv.max_abs(),
            )
        )
        m_coh = build_superoperator(rep, ModelParameters(1.0, 0.0, n), basis).m
        m_dis = build_superoperator(rep, ModelParameters(0.0, 1.0, n), basis).m
        affine = np.abs(omega * m_coh + gamma * m_dis - liouv.m).max()
        checks.append(_check(f"affine_decomposition[N={n}]", affine, 1e-12))
        # drive only moves q, dissipation only moves k
        labels = hop.labels
        coh_dk = max(
            (
                np.abs(m_coh[a, b])
                for a, (k1, q1) in enumerate(labels)
                for b, (k2, q2) in enumerate(labels)
                if k1 != k2
            ),
            default=0.0,
        )
        dis_dq = max(
            (
                np.abs(m_dis[a, b])
                for a, (k1, q1) in enumerate(labels)
                for b, (k2, q2) in enumerate(labels)
                if q1 != q2
            ),
            default=0.0,
        )
        checks.append(_check(f"drive_moves_q_only[N={n}]", coh_dk, 1e-12))
        checks.append(_check(f"dissipation_moves_k_only[N={n}]", dis_dq, 1e-12))
    return checks


def suite_consistency(config) -> list[dict]:
    """Tensor-basis generator vs the independent vectorized construction."""
    checks = []
    rng = np.random.default_rng(config["seed"])
    for n in (2, 4, 10):
        rep = SpinRepresentation.from_n_spins(n)
        basis = build_tensor_basis(rep)
        omega, gamma = rng.uniform(0.2, 2.0, size=2)
        params = ModelParameters(omega=omega, gamma_rate=gamma, n_spins=n)
        direct = build_superoperator(rep, params, basis).m
        rotated = tensor_basis_superoperator_from_vectorized(
            build_superoperator_vectorized(rep, params), basis
        )
        checks.append(
            _check(f"two_path_agreement[N={n}]", np.abs(direct - rotated).max(), 1e-10)
        )
        # Hermiticity preservation: (k',-q')(k,-q) entry is the phased conjugate
        labels = [(k, q) for k in range(n + 1) for q in range(-k, k + 1)]
        sym_err = max(
            abs(
                direct[tensor_index(k1, -q1), tensor_index(k2, -q2)]
                - (-1) ** (q1 + q2) * np.conj(direct[a, b])
            )
            for a, (k1, q1) in enumerate(labels)
            for b, (k2, q2) in enumerate(labels)
        )
        checks.append(_check(f"hermiticity_symmetry[N={n}]", sym_err, 1e-12))
    return checks


def suite_steady(config) -> list[dict]:
    """Steady-state contract at the battery size."""
    checks = []
    n = config["n_spins"]
    rep = SpinRepresentation.from_n_spins(n)
    basis = build_tensor_basis(rep)
    params = ModelParameters(omega=1.0, gamma_rate=1.0, n_spins=n)
    liouv = build_superoperator(rep, params, basis)
    decomp = spectrum(liouv)
    checks.append(
        _check(
            "steady_eigenvalue_count",
            len(decomp.steady_indices),
            1,
            passed=len(decomp.steady_indices) == 1,
        )
    )
    vec = steady_state(liouv, decomp)
    rho = reconstruct(vec, basis)
    checks.append(_check("steady_trace", abs(np.trace(rho) - 1.0), 1e-9))
    checks.append(_check("steady_hermiticity", np.abs(rho - rho.conj().T).max(), 1e-9))
    evals = np.linalg.eigvalsh((rho + rho.conj().T) / 2)
    checks.append(
        _check("steady_positivity", max(0.0, -float(evals.min())), 1e-9)
    )
    conj_closed = 0.0
    vals = decomp.eigenvalues
    for lam in vals:
        conj_closed = max(conj_closed, float(np.abs(vals - lam.conjugate()).min()))
    checks.append(_check("spectrum_conjugation_closed", conj_closed, 1e-9))
    return checks


def suite_equivalence(config) -> list[dict]:
    """Primary vs doubled-chiral localizer over random probe points."""
    n = config["n_spins"]
    rep = SpinRepresentation.from_n_spins(n)
    basis = build_tensor_basis(rep)
    params = ModelParameters(omega=1.0, gamma_rate=0.75, n_spins=n)
    liouv = build_superoperator(rep, params, basis)
    pos = loc.position_superoperator(basis)
    vals = np.linalg.eigvals(liouv.m)
    rng = np.random.default_rng(config["seed"])
    flip = -1 if config.get("inject") == "alt-sign" else 1
    sign_fail = 0
    mu_err = 0.0
    # fixture probe with a guaranteed nonzero index, so a sign defect cannot
    # hide behind nu = 0 samples
    chain = loc.hatano_nelson(24, 1.2, 0.4)
    chain_pos = np.arange(24.0)
    probe = loc.local_index(chain, chain_pos, 12.0, 0.0, 1.0)
    probe_alt = loc.alt_localizer_index(chain, chain_pos, 12.0, 0.0, 1.0)
    if probe.nu_int == 0 or flip * probe_alt.nu_int != -probe.nu_int:
        sign_fail += 1
    mu_err = max(mu_err, abs(probe.mu - probe_alt.mu))
    drawn = 0
    attempts = 0
    while drawn < config["samples_equivalence"] and attempts < 20 * config["samples_equivalence"]:
        attempts += 1
        x0 = rng.uniform(0.0, rep.n_spins)
        lam0 = complex(
            rng.uniform(vals.real.min(), vals.real.max()),
            rng.uniform(vals.imag.min(), vals.imag.max()),
        )
        kappa = rng.uniform(0.5, 2.0)
        sample = loc.local_index(liouv, pos, x0, lam0, kappa)
        alt = loc.alt_localizer_index(liouv, pos, x0, lam0, kappa)
        if not (sample.well_defined and alt.well_defined):
            continue  # no index without a gap; resample
        drawn += 1
        if flip * alt.nu_int != -sample.nu_int:
            sign_fail += 1
        mu_err = max(mu_err, abs(sample.mu - alt.mu))
    checks = [
        _check(
            "equivalence_sign_flip",
            sign_fail,
            0,
            passed=(sign_fail == 0 and drawn == config["samples_equivalence"]),
            detail=f"{drawn} well-defined samples",
        ),
        _check("equivalence_gap_agreement", mu_err, 1e-10),
    ]
    return checks


def suite_hatano_nelson(config) -> list[dict]:
    """Localizer index vs Bloch winding on asymmetric open chains.

    lambda0 is drawn inside the half-scaled Bloch ellipse and the hopping
    asymmetry is bounded below; at n=40 sites that keeps the finite chain in
    the regime where the mid-chain index resolves the winding.
    """
    rng = np.random.default_rng(config["seed"])
    n_sites = 40
    mismatches = 0
    sign_mismatches = 0
    done = 0
    while done < config["samples_hn"]:
        t_right, t_left = rng.uniform(0.3, 1.5, size=2)
        if abs(t_right - t_left) < 0.3:
            continue
        a, b = t_right + t_left, abs(t_right - t_left)
        ang = rng.uniform(0.0, 2 * np.pi)
        frac = rng.uniform(0.0, 0.5)
        lam0 = complex(frac * a * np.cos(ang), frac * b * np.sin(ang))
        try:
            wind = loc.bloch_winding(t_right, t_left, 0.0, lam0)
        except ValueError:
            continue
        chain = loc.hatano_nelson(n_sites, t_right, t_left)
        positions = np.arange(n_sites, dtype=float)
        sample = loc.local_index(chain, positions, n_sites / 2, lam0, 1.0)
        if not sample.well_defined:
            continue
        done += 1
        if abs(sample.nu_int) != abs(wind):
            mismatches += 1
        if sample.nu_int != -wind:
            sign_mismatches += 1
    return [
        _check(
            "hatano_nelson_magnitude",
            mismatches,
            0,
            passed=mismatches == 0,
            detail=f"{done} instances at n_sites={n_sites}",
        ),
        _check(
            "hatano_nelson_sign_relation",
            sign_mismatches,
            0,
            passed=sign_mismatches == 0,
            detail="localizer index equals minus the Bloch winding",
        ),
    ]


SUITES = {
    "algebra": suite_algebra,
    "trace": suite_trace,
    "structure": suite_structure,
    "consistency": suite_consistency,
    "steady": suite_steady,
    "equivalence": suite_equivalence,
    "hatano-nelson": suite_hatano_nelson,
}

DEFAULTS = {
    "n_spins": 10,
    "seed": 1234,
    "j_max": 5.0,
    "samples_trace": 20,
    "samples_equivalence": 100,
    "samples_hn": 20,
    "inject": None,
}


def run_suite(names=None, **overrides) -> dict:
    """Run the named suites (all by default) and assemble the report."""
    config = dict(DEFAULTS)
    config.update({k: v for k, v in overrides.items() if v is not None})
    if names is None or names == ["all"]:
        names = list(SUITES)
    checks = []
    for name in names:
        if name not in SUITES:
            raise ValueError(f"unknown suite {name!r}; choose from {sorted(SUITES)}")
        checks.extend(SUITES[name](config))
    return {
        "suites": list(names),
        "config": {k: config[k] for k in DEFAULTS},
        "checks": checks,
        "all_passed": all(c["passed"] for c in checks),
    }
