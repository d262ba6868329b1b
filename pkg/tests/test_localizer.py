"""Localizer construction, signature, sweeps, and the chain-winding oracle."""

import numpy as np
import pytest
import scipy.linalg as sla

import spintop as st
from spintop.localizer import DEFAULT_ZERO_TOL_FACTOR

from conftest import liouv_for


@pytest.fixture(scope="module")
def liouv6():
    return liouv_for(6, 1.0, 2.0)


@pytest.fixture(scope="module")
def pos6(liouv6):
    return st.position_superoperator(liouv6.basis)


class TestBuildLocalizer:
    def test_hermitian_for_random_probes(self, liouv6, pos6):
        rng = np.random.default_rng(11)
        for _ in range(100):
            x0 = rng.uniform(-1, 7)
            lam0 = complex(rng.uniform(-4, 1), rng.uniform(-5, 5))
            kappa = rng.uniform(0.1, 3.0)
            loc = st.build_localizer(liouv6, pos6, x0, lam0, kappa)
            assert np.abs(loc - loc.conj().T).max() < 1e-12

    def test_dimension(self, basis10):
        liouv = liouv_for(10, 1.0, 1.0, basis10)
        pos = st.position_superoperator(basis10)
        loc = st.build_localizer(liouv, pos, 0.0, 0.0, 1.0)
        assert loc.shape == (242, 242)

    def test_antihermitian_generator_gives_symmetric_spectrum(self):
        # gamma=0 and real lambda0: conjugation by (sx kron I) flips the sign,
        # so eigenvalues pair up as +-e and the index vanishes
        liouv = liouv_for(6, 1.0, 0.0)
        pos = st.position_superoperator(liouv.basis)
        loc = st.build_localizer(liouv, pos, 1.7, 0.3, 1.0)
        vals = np.sort(np.linalg.eigvalsh(loc))
        assert np.abs(vals + vals[::-1]).max() < 1e-10
        sample = st.local_index(liouv, pos, 1.7, 0.3, 1.0)
        assert sample.nu == 0

    def test_rejects_nonpositive_kappa(self, liouv6, pos6):
        with pytest.raises(ValueError):
            st.build_localizer(liouv6, pos6, 0.0, 0.0, 0.0)

    def test_position_operator_spectrum(self, basis10):
        pos = st.position_superoperator(basis10)
        vals, counts = np.unique(pos.diagonal, return_counts=True)
        assert np.array_equal(vals, np.arange(11.0))
        assert np.array_equal(counts, 2 * np.arange(11) + 1)


class TestSignature:
    def test_simple(self):
        assert st.signature(np.diag([1.0, -1.0]), 1e-12) == (0, True)

    def test_near_zero_flagged(self):
        sig, clear = st.signature(np.diag([2.0, 1.0, 1e-15]), 1e-12)
        assert sig == 2
        assert clear is False

    def test_against_second_eigensolver(self):
        rng = np.random.default_rng(5)
        raw = rng.standard_normal((50, 50)) + 1j * rng.standard_normal((50, 50))
        h = raw + raw.conj().T
        sig, clear = st.signature(h, 1e-10)
        # independent driver: scipy's QR-iteration path instead of
        # divide-and-conquer
        vals = sla.eigvalsh(h, driver="ev")
        ref = int((vals > 1e-10).sum() - (vals < -1e-10).sum())
        assert sig == ref
        assert clear

    def test_rejects_non_hermitian(self):
        with pytest.raises(ValueError):
            st.signature(np.array([[0.0, 1.0], [0.0, 0.0]]), 1e-12)


class TestLocalIndex:
    def test_structural_zero_mode_is_flagged(self, liouv6, pos6):
        # at x0=0, lambda0=0 the trace-preservation row makes (0; e_00) an
        # exact null vector of the localizer
        sample = st.local_index(liouv6, pos6, 0.0, 0.0, 1.0)
        assert not sample.well_defined
        assert sample.mu < 1e-10
        with pytest.raises(ValueError):
            sample.nu_int

    def test_nonzero_domain_exists(self, liouv6, pos6):
        # strong decay pushes a nonzero-index domain into the low ranks
        nus = [
            st.local_index(liouv6, pos6, x0, 0.0, 1.0)
            for x0 in (0.5, 1.0, 1.5)
        ]
        assert any(s.well_defined and s.nu != 0 for s in nus)

    def test_hatano_nelson_fixture(self):
        chain = st.hatano_nelson(40, 1.0, 0.5)
        sample = st.local_index(chain, np.arange(40.0), 20.0, 0.0, 1.0)
        assert sample.well_defined
        assert abs(sample.nu_int) == 1


class TestAltLocalizer:
    def test_sign_flip_on_generator(self, liouv6, pos6):
        rng = np.random.default_rng(23)
        vals = np.linalg.eigvals(liouv6.m)
        for _ in range(30):
            x0 = rng.uniform(0.0, 6.0)
            lam0 = complex(
                rng.uniform(vals.real.min(), vals.real.max()),
                rng.uniform(vals.imag.min(), vals.imag.max()),
            )
            kappa = rng.uniform(0.5, 2.0)
            a = st.local_index(liouv6, pos6, x0, lam0, kappa)
            b = st.alt_localizer_index(liouv6, pos6, x0, lam0, kappa)
            if a.well_defined and b.well_defined:
                assert b.nu_int == -a.nu_int
                assert abs(a.mu - b.mu) < 1e-10

    def test_sign_flip_on_chain(self):
        chain = st.hatano_nelson(40, 1.0, 0.5)
        x = np.arange(40.0)
        a = st.local_index(chain, x, 20.0, 0.0, 1.0)
        b = st.alt_localizer_index(chain, x, 20.0, 0.0, 1.0)
        assert b.nu_int == -a.nu_int != 0
        assert abs(a.mu - b.mu) < 1e-10

    def test_trivial_case(self):
        liouv = liouv_for(4, 1.0, 0.0)
        pos = st.position_superoperator(liouv.basis)
        a = st.local_index(liouv, pos, 1.3, 0.0, 1.0)
        b = st.alt_localizer_index(liouv, pos, 1.3, 0.0, 1.0)
        assert a.nu == b.nu == 0


class TestSweepPosition:
    def test_trivial_for_coherent_dynamics(self):
        liouv = liouv_for(6, 1.0, 0.0)
        pos = st.position_superoperator(liouv.basis)
        sweep = st.sweep_position(liouv, pos, np.arange(0.0, 6.1, 0.5), 0.0, 1.0)
        assert (sweep.nu_values() == 0).all()
        assert sweep.boundaries == []

    def test_boundaries_and_domains(self, liouv6, pos6):
        grid = np.arange(0.0, 6.01, 0.25)
        sweep = st.sweep_position(liouv6, pos6, grid, 0.0, 1.0)
        nu = sweep.effective_nu()
        for i, l in sweep.boundaries:
            assert nu[i] != nu[l]
        domains = sweep.nonzero_domains()
        assert domains, "strong-decay sweep should contain a nonzero domain"
        for d in domains:
            assert (nu[d["start"]: d["stop"] + 1] == d["nu"]).all()

    def test_parallel_matches_serial(self, liouv6, pos6):
        grid = np.arange(0.0, 3.01, 0.5)
        serial = st.sweep_position(liouv6, pos6, grid, 0.0, 1.0, n_jobs=1)
        parallel = st.sweep_position(liouv6, pos6, grid, 0.0, 1.0, n_jobs=2)
        assert [s.nu for s in serial.samples] == [s.nu for s in parallel.samples]
        assert [s.mu for s in serial.samples] == [s.mu for s in parallel.samples]

    def test_rejects_bad_grid(self, liouv6, pos6):
        with pytest.raises(ValueError):
            st.sweep_position(liouv6, pos6, [], 0.0, 1.0)
        with pytest.raises(ValueError):
            st.sweep_position(liouv6, pos6, [1.0, 0.5], 0.0, 1.0)


class TestSweepSpectral:
    def test_real_axis_trivial_without_decay(self):
        liouv = liouv_for(4, 1.0, 0.0)
        pos = st.position_superoperator(liouv.basis)
        sweep = st.sweep_spectral(
            liouv, pos, 1.0, np.linspace(-1, 1, 5), np.linspace(-2, 2, 5), 1.0
        )
        nu = np.array([s.nu if s.well_defined else 0.0 for s in sweep.samples])
        grid = nu.reshape(5, 5)
        assert (grid[:, 2] == 0).all()  # im(lambda0) = 0 column
        assert sweep.eigenvalues.shape == (25,)

    def test_islands_extraction(self):
        nu = np.zeros((5, 5))
        nu[1, 1] = 1
        nu[1, 2] = 1
        nu[3, 3] = -1
        nu[0, 4] = 1  # diagonal neighbour of (1,3): must stay separate
        islands = st.extract_islands(nu)
        assert len(islands) == 3
        sizes = sorted(i["cell_count"] for i in islands)
        assert sizes == [1, 1, 2]

    def test_grid_too_small(self, liouv6, pos6):
        with pytest.raises(ValueError):
            st.sweep_spectral(liouv6, pos6, 1.0, [0.0], [0.0, 1.0], 1.0)


class TestSweepKappa:
    def test_single_kappa_matches_position_sweep(self, liouv6, pos6):
        grid = np.arange(0.0, 3.01, 0.5)
        direct = st.sweep_position(liouv6, pos6, grid, 0.0, 1.0)
        via_kappa = st.sweep_kappa(liouv6, pos6, grid, 0.0, [1.0])[0]
        assert [s.nu for s in direct.samples] == [s.nu for s in via_kappa.samples]
        assert [s.mu for s in direct.samples] == [s.mu for s in via_kappa.samples]
        assert direct.boundaries == via_kappa.boundaries

    def test_stability_report_shape(self, liouv6, pos6):
        grid = np.arange(0.0, 4.01, 0.25)
        sweeps = st.sweep_kappa(liouv6, pos6, grid, 0.0, [0.5, 1.0, 2.0])
        report = st.kappa_stability_report(sweeps)
        assert [e["kappa"] for e in report["per_kappa"]] == [0.5, 1.0, 2.0]
        assert "0.5~1" in report["pairwise"]
        for entry in report["per_kappa"]:
            assert entry["nonzero_points"] >= 0

    def test_rejects_bad_kappas(self, liouv6, pos6):
        with pytest.raises(ValueError):
            st.sweep_kappa(liouv6, pos6, [0.0, 1.0], 0.0, [])
        with pytest.raises(ValueError):
            st.sweep_kappa(liouv6, pos6, [0.0, 1.0], 0.0, [1.0, -2.0])


class TestHatanoNelson:
    def test_hermitian_limit_no_winding(self):
        assert st.bloch_winding(0.7, 0.7, 0.0, 0.3 + 0.5j) == 0

    def test_orientation_convention(self):
        # dominant rightward hopping traces the loop clockwise: winding -1
        assert st.bloch_winding(1.0, 0.5, 0.0, 0.0) == -1
        assert st.bloch_winding(0.5, 1.0, 0.0, 0.0) == +1

    def test_onsite_shift(self):
        assert st.bloch_winding(1.0, 0.5, 2.0, 2.0) == -1
        assert st.bloch_winding(1.0, 0.5, 2.0, 0.0 + 5.0j) == 0

    def test_gap_closing_rejected(self):
        with pytest.raises(ValueError):
            st.bloch_winding(1.0, 0.5, 0.0, 1.5)  # on the loop at p=0

    def test_chain_validation(self):
        with pytest.raises(ValueError):
            st.hatano_nelson(4, 1.0, 0.5)
        with pytest.raises(ValueError):
            st.hatano_nelson(10, 1.0 + 0.1j, 0.5)

    def test_chain_matrix_layout(self):
        h = st.hatano_nelson(8, 1.5, 0.25, onsite=0.75)
        assert h[1, 0] == 1.5
        assert h[0, 1] == 0.25
        assert h[3, 3] == 0.75

    def test_localizer_matches_winding_battery(self):
        rng = np.random.default_rng(99)
        done = 0
        while done < 20:
            t_right, t_left = rng.uniform(0.3, 1.5, size=2)
            if abs(t_right - t_left) < 0.3:
                continue
            a, b = t_right + t_left, abs(t_right - t_left)
            ang = rng.uniform(0, 2 * np.pi)
            frac = rng.uniform(0.0, 0.5)
            lam0 = complex(frac * a * np.cos(ang), frac * b * np.sin(ang))
            wind = st.bloch_winding(t_right, t_left, 0.0, lam0)
            chain = st.hatano_nelson(40, t_right, t_left)
            sample = st.local_index(chain, np.arange(40.0), 20.0, lam0, 1.0)
            assert sample.well_defined
            assert abs(sample.nu_int) == abs(wind)
            assert sample.nu_int == -wind
            done += 1


class TestStabilityProperties:
    def test_index_stable_under_small_perturbation(self, liouv6, pos6):
        rng = np.random.default_rng(31)
        base = st.local_index(liouv6, pos6, 2.0, 0.0, 1.0)
        scale = 1e-6
        assert base.mu > 100 * scale * liouv6.max_abs()
        for _ in range(5):
            noise = 1 + scale * rng.uniform(-1, 1, size=liouv6.m.shape)
            perturbed = liouv6.m * noise
            sample = st.local_index(perturbed, pos6.diagonal, 2.0, 0.0, 1.0)
            assert sample.nu == base.nu

    def test_gap_is_kappa_lipschitz_in_x0(self, liouv6, pos6):
        kappa = 1.0
        mus = {}
        grid = np.arange(0.5, 3.01, 0.1)
        for x0 in grid:
            mus[round(x0, 10)] = st.local_index(liouv6, pos6, x0, 0.0, kappa).mu
        keys = sorted(mus)
        for a, b in zip(keys, keys[1:]):
            delta = b - a
            assert abs(mus[b] - mus[a]) <= kappa * delta + 1e-12

    def test_index_change_requires_gap_closing(self, liouv6, pos6):
        # refine toward the transition point: the gap must collapse there
        grid = np.arange(0.0, 6.01, 0.25)
        sweep = st.sweep_position(liouv6, pos6, grid, 0.0, 1.0)
        assert sweep.boundaries
        i, l = sweep.boundaries[-1]
        lo, hi = grid[i], grid[l]
        zero_tol = DEFAULT_ZERO_TOL_FACTOR * np.abs(
            st.build_localizer(liouv6, pos6, lo, 0.0, 1.0)
        ).max()
        min_mu = min(
            st.local_index(liouv6, pos6, x, 0.0, 1.0).mu for x in (lo, hi)
        )
        for _ in range(60):
            mid = (lo + hi) / 2
            sample = st.local_index(liouv6, pos6, mid, 0.0, 1.0)
            min_mu = min(min_mu, sample.mu)
            if min_mu < 10 * zero_tol:
                break
            lo_nu = st.local_index(liouv6, pos6, lo, 0.0, 1.0).nu
            if sample.nu == lo_nu:
                lo = mid
            else:
                hi = mid
        assert min_mu < 10 * zero_tol
