"""Tests for the deformation schemes and the generic engines."""

import math

import numpy as np
import pytest

from solitonlab import numerics, solitons as S, transforms as T
from solitonlab.solitons import ConfigError, SolitonConfig


class TestClosedFormRewrites:
    def test_darboux_ground_sech2(self):
        res = T.darboux_ground(SolitonConfig((1.0, 2.0), (6.0, 12.0)))
        assert res.after_k == (1.0,)
        assert res.after_c == pytest.approx((2.0,))
        assert res.scheme == "darboux_ground"

    def test_darboux_ground_to_trivial(self):
        res = T.darboux_ground(SolitonConfig((1.0,), (2.0,)))
        assert res.after.n == 0
        assert S.potential(res.after, 0.7) == 0.0

    def test_darboux_ground_n3(self):
        res = T.darboux_ground(SolitonConfig((1.0, 2.0, 3.0), (1.0, 1.0, 1.0)))
        assert res.after_c == pytest.approx((0.5, 0.2))

    def test_darboux_ground_trivial_raises(self):
        with pytest.raises(ConfigError):
            T.darboux_ground(SolitonConfig((), ()))

    def test_krein_adler_check(self):
        assert not T.krein_adler_check(2, [1])
        assert T.krein_adler_check(2, [1, 2])
        assert T.krein_adler_check(4, [2, 3])
        assert not T.krein_adler_check(4, [2, 4])

    def test_krein_adler_single_ground(self):
        res = T.krein_adler_delete(SolitonConfig((1.0, 2.0), (3.0, 1.0)), [2])
        assert res.after_c == pytest.approx((1.0,))

    def test_krein_adler_delete_all(self):
        res = T.krein_adler_delete(SolitonConfig((1.0, 2.0), (1.0, 1.0)), [1, 2])
        assert res.after.n == 0

    def test_krein_adler_pair(self):
        res = T.krein_adler_delete(SolitonConfig((1.0, 2.0, 3.0), (1.0, 1.0, 1.0)), [2, 3])
        assert res.after_c == pytest.approx((1.0 / 6.0,))

    def test_krein_adler_condition_enforced(self):
        cfg = SolitonConfig((1.0, 2.0), (1.0, 1.0))
        with pytest.raises(ConfigError, match="m=2"):
            T.krein_adler_delete(cfg, [1])
        res = T.krein_adler_delete(cfg, [1], unsafe=True)
        assert not res.is_regular
        with pytest.raises(ConfigError):
            res.after

    def test_am_delete_any_set(self):
        cfg = SolitonConfig((1.0, 2.0), (6.0, 12.0))
        assert T.am_delete(cfg, [2]).after_c == pytest.approx((6.0 / 9.0,))
        assert T.am_delete(cfg, [1]).after_c == pytest.approx((12.0 / 9.0,))
        assert T.am_delete(cfg, [1, 2]).after.n == 0

    def test_am_add_rescale(self):
        cfg = SolitonConfig((1.0, 2.0), (4.0, 10.0))
        res = T.am_add(cfg, {1: 3.0})
        assert res.after_c == pytest.approx((3.0, 10.0))
        assert res.after_k == cfg.k
        res = T.am_add(cfg, {2: 1.0})
        assert res.after_c == pytest.approx((4.0, 5.0))

    def test_am_add_large_e_limit(self):
        cfg = SolitonConfig((1.0,), (2.0,))
        res = T.am_add(cfg, {1: 1e12})
        assert abs(res.after_c[0] - 2.0) < 1e-11

    def test_am_add_validation(self):
        cfg = SolitonConfig((1.0,), (2.0,))
        with pytest.raises(ConfigError):
            T.am_add(cfg, {1: -1.0})
        with pytest.raises(ConfigError):
            T.am_add(cfg, {2: 1.0})

    def test_deletion_commutes(self):
        rng = np.random.default_rng(21)
        cfg = S.random_config(rng, n=5)
        step1 = T.am_delete(cfg, [2])
        step2 = T.am_delete(step1.after, [3])  # index 4 of the original
        joint = T.am_delete(cfg, [2, 4])
        assert step2.after_k == joint.after_k
        assert np.max(np.abs(np.array(step2.after_c) - joint.after_c)) < 1e-13


class TestWronskian:
    def test_single_function(self):
        f = T.free_seed(1.0, 0.0)
        w = T.wronskian([f], 0.3, 2)
        assert np.allclose(w.coeffs, f(0.3, 2).coeffs)

    def test_two_exponentials(self):
        # W[e^{ax}, e^{bx}] = (b - a) e^{(a+b)x}
        from solitonlab.jets import jet_exp

        a, b, x = 0.7, 1.9, 0.4
        fa = lambda xx, order: jet_exp(a, xx, order)
        fb = lambda xx, order: jet_exp(b, xx, order)
        w = T.wronskian([fa, fb], x, 0)
        assert w.coeffs[0] == pytest.approx((b - a) * math.exp((a + b) * x), rel=1e-13)

    def test_three_exponentials_vandermonde(self):
        from solitonlab.jets import jet_exp

        fns = [lambda xx, order, a=a: jet_exp(a, xx, order) for a in (1.0, 2.0, 3.0)]
        w = T.wronskian(fns, 0.0, 0)
        assert w.coeffs[0] == pytest.approx(2.0, rel=1e-12)

    def test_empty(self):
        assert T.wronskian([], 0.0, 1).coeffs[0] == 1.0


class TestGenericDarboux:
    def test_no_seeds_is_identity(self):
        cfg = SolitonConfig((1.0,), (2.0,))
        tgt = T.eigenfunction_seed(cfg, 1)
        out = T.generic_darboux([], tgt, 0.5, 1)
        assert np.allclose(out.coeffs, tgt(0.5, 1).coeffs)

    def test_repeated_seed_annihilates(self):
        cfg = SolitonConfig((1.0, 2.0), (6.0, 12.0))
        seed = T.eigenfunction_seed(cfg, 2)
        out = T.generic_darboux([seed], seed, 0.3, 0)
        assert abs(out.coeffs[0]) < 1e-14

    def test_ground_deletion_matches_closed_form(self):
        rng = np.random.default_rng(22)
        cfg = S.random_config(rng, n=3)
        after = T.darboux_ground(cfg).after
        ufn = S.potential_fn(cfg)
        seeds = [T.eigenfunction_seed(cfg, cfg.n)]
        for x in np.linspace(-8 / cfg.k[0], 8 / cfg.k[0], 11):
            v = T.darboux_potential(seeds, ufn, float(x))
            assert v == pytest.approx(S.potential(after, float(x)), abs=1e-9)

    def test_krein_adler_pair_matches_generic(self):
        rng = np.random.default_rng(23)
        cfg = S.random_config(rng, n=4)
        dset = [3, 4]
        after = T.krein_adler_delete(cfg, dset).after
        ufn = S.potential_fn(cfg)
        seeds = T.eigenfunction_seeds(cfg, dset)
        for x in np.linspace(-8 / cfg.k[0], 8 / cfg.k[0], 11):
            v = T.darboux_potential(seeds, ufn, float(x))
            assert v == pytest.approx(S.potential(after, float(x)), abs=1e-9)

    def test_deleted_seed_image_solves_new_hamiltonian(self):
        cfg = SolitonConfig((1.0, 2.0), (6.0, 12.0))
        seeds = T.eigenfunction_seeds(cfg, [2])
        after = T.darboux_ground(cfg).after
        x = 0.4
        img = T.deleted_seed_image(seeds, 0, x, 2)
        u = S.potential(after, x)
        res = -img.deriv(2) + (u + cfg.k[1] ** 2) * img.coeffs[0]
        assert abs(res) < 1e-9 * max(abs(img.coeffs[0]), 1e-3)

    def test_transmission_product_from_free_seeds(self):
        # chaining all free seeds maps a plane wave to one with far-field
        # amplitude ratio prod (ik - k_j)/(ik + k_j)
        k = (0.8, 1.6)
        ctilde = (1.3, -0.9)
        cfg = T.seed_config_from_free(k, ctilde)
        seeds = [T.free_seed(kj, ct, j + 1) for j, (kj, ct) in enumerate(zip(k, ctilde))]
        kw = 1.1
        target = T.plane_wave_seed(kw)
        xr, xl = 12.0, -12.0
        out_r = T.generic_darboux(seeds, target, xr, 0).coeffs[0]
        out_l = T.generic_darboux(seeds, target, xl, 0).coeffs[0]
        ratio = (out_r * np.exp(-1j * kw * xr)) / (out_l * np.exp(-1j * kw * xl))
        # far-field ratio equals the transmission amplitude product
        assert ratio == pytest.approx(complex(numerics.transmission_product(cfg, kw)), abs=1e-5)


class TestSeedConfigMap:
    def test_n1_map(self):
        cfg = T.seed_config_from_free((1.5,), (2.0,))
        assert cfg.c == pytest.approx((2.0 * 1.5 * 2.0,))

    def test_sign_pattern_enforced(self):
        with pytest.raises(ConfigError):
            T.seed_config_from_free((1.0, 2.0), (1.0, 1.0))

    def test_wronskian_reproduces_potential(self):
        k = (0.9, 1.7, 2.6)
        ctilde = (1.1, -0.6, 2.3)
        cfg = T.seed_config_from_free(k, ctilde)
        seeds = [T.free_seed(kj, ct) for kj, ct in zip(k, ctilde)]
        for x in np.linspace(-3, 3, 7):
            v = T.darboux_potential(seeds, lambda _: 0.0, float(x))
            assert v == pytest.approx(S.potential(cfg, float(x)), abs=1e-9)


class TestGenericAM:
    def test_delete_matches_closed_form(self):
        rng = np.random.default_rng(24)
        cfg = S.random_config(rng, n=4)
        for dset in ([2], [1, 3]):
            after = T.am_delete(cfg, dset).after
            seeds = T.eigenfunction_seeds(cfg, dset)
            for x in np.linspace(-8 / cfg.k[0], 8 / cfg.k[0], 9):
                r = T.generic_am(seeds, "delete", x=float(x))
                assert r.potential == pytest.approx(S.potential(after, float(x)), abs=1e-10)

    def test_add_matches_closed_form(self):
        rng = np.random.default_rng(25)
        cfg = S.random_config(rng, n=3)
        e = [2.0, 0.7]
        after = T.am_add(cfg, {1: e[0], 3: e[1]}).after
        seeds = T.eigenfunction_seeds(cfg, [1, 3])
        for x in np.linspace(-8 / cfg.k[0], 8 / cfg.k[0], 9):
            r = T.generic_am(seeds, "add", e=e, x=float(x))
            assert r.potential == pytest.approx(S.potential(after, float(x)), abs=1e-10)

    def test_deleted_target_maps_to_new_eigenfunction(self):
        cfg = SolitonConfig((1.0, 2.0, 3.0), (1.0, 2.0, 3.0))
        after = T.am_delete(cfg, [3]).after
        seeds = T.eigenfunction_seeds(cfg, [3])
        tgt = T.eigenfunction_seed(cfg, 1)
        ratios = []
        for x in (-1.0, 0.0, 0.7, 1.5):
            r = T.generic_am(seeds, "delete", target=tgt, x=x)
            ratios.append(r.target_value / S.eigenfunction(after, 1, x, 0).coeffs[0])
        assert np.std(ratios) / abs(np.mean(ratios)) < 1e-9

    def test_binary_darboux_equivalence(self):
        # one addition step equals two chained Darboux steps: first with
        # phi, then with (e + <s,s>)/phi, a solution of the once-
        # transformed Hamiltonian at the same energy
        from solitonlab.identities import inner_tail
        from solitonlab.jets import Jet, jet_log_d2

        cfg = SolitonConfig((1.0, 2.0), (6.0, 12.0))
        j, e1 = 2, 1.7
        after = T.am_add(cfg, {j: e1}).after
        phi = T.eigenfunction_seed(cfg, j)

        def second_seed(x, order):
            base = phi(x, order + 1)
            # F(x) = e + <s,s>(x) = e + 1 - c_j * tail(x); F' = c_j phi^2
            fval = e1 + 1.0 - cfg.c[j - 1] * inner_tail(cfg, j, j, x)
            s2 = (base * base) * cfg.c[j - 1]
            coeffs = [fval]
            for n in range(order):
                coeffs.append(s2.coeffs[n] / (n + 1))
            return Jet(float(x), np.array(coeffs)) / base.truncate(order)

        ufn = S.potential_fn(cfg)
        for x in (-1.0, 0.2, 1.1):
            u1 = T.darboux_potential([phi], ufn, x)
            chi = second_seed(x, 2)
            chi = chi if chi.coeffs[0] > 0 else -chi
            u2 = u1 - 2.0 * jet_log_d2(chi)
            assert u2 == pytest.approx(S.potential(after, x), abs=1e-8)

    def test_mixed_configs_rejected(self):
        a = SolitonConfig((1.0,), (2.0,))
        b = SolitonConfig((1.5,), (2.0,))
        with pytest.raises(ConfigError):
            T.generic_am([T.eigenfunction_seed(a, 1), T.eigenfunction_seed(b, 1)], "delete")


class TestSpectrumContracts:
    def test_post_deletion_spectrum(self):
        rng = np.random.default_rng(26)
        cfg = S.random_config(rng, n=4, k_range=(0.5, 3.5))
        res = T.am_delete(cfg, [2, 3])
        sp = numerics.bound_spectrum(S.potential_fn(res.after), 16.0 / res.after_k[0])
        expected = sorted(-k * k for k in res.after_k)
        assert len(sp.energies) == 2
        assert np.max(np.abs(np.array(sp.energies) - expected)) < 1e-3

    def test_am_add_isospectral(self):
        rng = np.random.default_rng(27)
        cfg = S.random_config(rng, n=3, k_range=(0.5, 3.5))
        res = T.am_add(cfg, {1: 2.0, 2: 0.5})
        before = numerics.bound_spectrum(S.potential_fn(cfg), 16.0 / cfg.k[0])
        after = numerics.bound_spectrum(S.potential_fn(res.after), 16.0 / cfg.k[0])
        assert len(before.energies) == len(after.energies) == 3
        assert np.max(np.abs(np.array(before.energies) - after.energies)) < 1e-3
