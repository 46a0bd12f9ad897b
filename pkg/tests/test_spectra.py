import numpy as np
import pytest

from spdc_etalon import (
    EnvelopeModel,
    GeometryError,
    Mode,
    ZeroVarianceError,
    compare_grids,
    detection_spectrum,
    frequency_angular_spectrum,
    gain_and_agreement_curve,
    parse_config,
    r_squared,
    solve_idler,
    transmission_curve,
)
from conftest import config_text

MATCHED_OVERRIDES = dict(superstrate="linbo3_e", substrate="linbo3_e")


def test_solve_idler_degenerate_exact(experiment_stack):
    pump = Mode(788.0, 0.0, role="pump")
    idler = solve_idler(pump, Mode(1576.0, 0.0), experiment_stack)
    assert idler.vacuum_wavelength_nm == 1576.0
    assert idler.internal_angle_rad == 0.0
    assert idler.role == "idler"


def test_solve_idler_energy_conservation_value(experiment_stack):
    pump = Mode(788.0, 0.0, role="pump")
    idler = solve_idler(pump, Mode(1300.0, 0.0), experiment_stack)
    assert idler.vacuum_wavelength_nm == pytest.approx(2000.78125, abs=1e-6)


def test_solve_idler_rejects_short_signal(experiment_stack):
    pump = Mode(788.0, 0.0, role="pump")
    with pytest.raises(GeometryError):
        solve_idler(pump, Mode(700.0, 0.0), experiment_stack)
    with pytest.raises(GeometryError):
        solve_idler(pump, Mode(788.0, 0.0), experiment_stack)


def test_solve_idler_normal_symmetry(experiment_stack):
    pump = Mode(788.0, 0.0, role="pump")
    for lam in (1200.0, 1576.0, 2200.0):
        assert solve_idler(pump, Mode(lam, 0.0), experiment_stack).internal_angle_rad == 0.0


def test_solve_idler_zeroes_transverse_mismatch(experiment_stack):
    from spdc_etalon import refractive_index, wavevector_components

    pump = Mode(788.0, 0.0, role="pump")
    signal = Mode(1500.0, 0.2)
    idler = solve_idler(pump, signal, experiment_stack)
    _, ks_perp = wavevector_components(
        signal, refractive_index(experiment_stack.film, 1500.0)
    )
    _, ki_perp = wavevector_components(
        idler, refractive_index(experiment_stack.film, idler.vacuum_wavelength_nm)
    )
    assert ks_perp + ki_perp == pytest.approx(0.0, abs=1e-15)


def test_solve_idler_opposite_sign_angle(experiment_stack):
    pump = Mode(788.0, 0.0, role="pump")
    idler = solve_idler(pump, Mode(1500.0, 0.2), experiment_stack)
    assert idler.internal_angle_rad < 0


# ---- frequency_angular_spectrum -------------------------------------------


def test_nonresonant_matched_grid_equals_phase_matching():
    cfg = parse_config(
        config_text(lambda_count=48, theta_count=24, **MATCHED_OVERRIDES)
    )
    grid = frequency_angular_spectrum(cfg, "nonresonant")
    stack = cfg.build_stack()

    from spdc_etalon import refractive_index

    lam_g, th_g = np.meshgrid(
        grid.signal_wavelengths_nm, grid.internal_angles_rad, indexing="ij"
    )
    lam_i = 788.0 * lam_g / (lam_g - 788.0)
    n_s = refractive_index(stack.film, lam_g)
    n_i = refractive_index(stack.film, lam_i)
    k_s = 2 * np.pi * n_s / lam_g
    k_i = 2 * np.pi * n_i / lam_i
    th_i = np.arcsin(np.clip(-k_s * np.sin(th_g) / k_i, -1.0, 1.0))
    kp = 2 * np.pi * refractive_index(stack.film, 788.0) / 788.0
    delta = stack.thickness_nm * (kp - k_s * np.cos(th_g) - k_i * np.cos(th_i))
    expected = np.sinc(delta / 2.0 / np.pi) ** 2
    keep = ~grid.mask
    assert np.allclose(grid.intensity["ff"][keep], expected[keep], rtol=1e-10, atol=1e-12)
    assert np.all(grid.intensity["bb"][keep] == 0.0)


def test_grid_models_agree_at_low_gain(small_config):
    simp = frequency_angular_spectrum(small_config, "simplified")
    rig = frequency_angular_spectrum(small_config, "rigorous")
    assert compare_grids(simp, rig, "ff") >= 0.999


def test_grid_rigorous_deviates_at_high_gain():
    cfg = parse_config(
        config_text(
            lambda_count=96,
            theta_count=2,
            theta_min_rad=-0.01,
            theta_max_rad=0.01,
            beta_plus="2.5",
        )
    )
    simp = frequency_angular_spectrum(cfg, "simplified")
    rig = frequency_angular_spectrum(cfg, "rigorous")
    assert compare_grids(simp, rig, "ff") < 0.9


def test_grid_mask_and_finiteness(small_config):
    for model in ("nonresonant", "simplified", "rigorous"):
        grid = frequency_angular_spectrum(small_config, model)
        for scheme, arr in grid.intensity.items():
            assert np.all(np.isfinite(arr)), (model, scheme)
            assert np.all(arr[grid.mask] == 0.0)
            assert np.all(arr >= 0.0)
        # Corner pixels past the grazing-idler boundary are masked.
        assert grid.mask.any()
        assert not grid.mask.all()


def test_grid_normalized_unit_max(small_config):
    grid = frequency_angular_spectrum(small_config, "simplified").normalized()
    peak = max(np.max(arr[~grid.mask]) for arr in grid.intensity.values())
    assert peak == 1.0
    assert grid.normalization == "unit-max"


def test_grid_thread_count_does_not_change_bits(small_config):
    base = frequency_angular_spectrum(small_config, "rigorous", threads=1)
    for threads in (2, 5):
        other = frequency_angular_spectrum(small_config, "rigorous", threads=threads)
        assert np.array_equal(base.mask, other.mask)
        for scheme in base.intensity:
            assert np.array_equal(base.intensity[scheme], other.intensity[scheme])


def test_grid_engine_matches_op_composition(experiment_stack):
    # Factorization consistency: the sweep engine's simplified pixels
    # equal the operation-by-operation product P x S.
    from test_simplified import _point_prediction

    cfg = parse_config(
        config_text(
            lambda_min_nm=1400.0,
            lambda_max_nm=1800.0,
            lambda_count=5,
            theta_min_rad=-0.2,
            theta_max_rad=0.2,
            theta_count=3,
        )
    )
    grid = frequency_angular_spectrum(cfg, "simplified")
    for i, lam in enumerate(grid.signal_wavelengths_nm):
        for j, theta in enumerate(grid.internal_angles_rad):
            if grid.mask[i, j]:
                continue
            point, _ = _point_prediction(experiment_stack, float(lam), float(theta), 1e-3)
            for scheme in ("ff", "bb", "fb", "bf"):
                assert grid.intensity[scheme][i, j] == pytest.approx(
                    point[scheme], rel=1e-12
                )


def test_chi2_route_matches_interaction_params_op(experiment_stack):
    # The sweep's chi2/field route must agree with the public
    # interaction-strength operation composed by hand.
    from dataclasses import replace

    from spdc_etalon import (
        Mode,
        boundary_matrices,
        interaction_matrix,
        interaction_params,
        interface_coeffs,
        pair_probabilities,
        propagation_phase,
        pump_enhancement,
        scattering_matrix,
    )

    text = config_text(
        lambda_min_nm=1500.0,
        lambda_max_nm=1700.0,
        lambda_count=3,
        theta_min_rad=-0.05,
        theta_max_rad=0.05,
        theta_count=3,
    ).replace("beta_plus = 1e-3", "field_v_per_m = 5e7")
    text = text.replace("thickness_um = 10.15", "thickness_um = 10.15\nchi2_pm_per_v = 30.0")
    cfg = parse_config(text)
    grid = frequency_angular_spectrum(cfg, "rigorous")

    stack = replace(experiment_stack, chi2_pm_per_v=30.0)
    pump = Mode(788.0, 0.0, role="pump")
    e_fwd, e_bwd = pump_enhancement(
        interface_coeffs(stack, pump), propagation_phase(stack, pump)
    )
    field = 5e7
    for i, lam in enumerate(grid.signal_wavelengths_nm):
        for j, theta in enumerate(grid.internal_angles_rad):
            signal = Mode(float(lam), float(theta))
            idler = solve_idler(pump, signal, stack)
            p = interaction_params(
                stack, pump, signal, idler, (field * e_fwd, field * e_bwd)
            )
            w = interaction_matrix(p)
            tau1, tau2, rho = boundary_matrices(
                interface_coeffs(stack, signal),
                interface_coeffs(stack, idler),
                propagation_phase(stack, signal),
                propagation_phase(stack, idler),
            )
            probs = pair_probabilities(scattering_matrix(w, tau1, tau2, rho))
            assert grid.intensity["ff"][i, j] == pytest.approx(probs.ff, rel=1e-10)


def test_low_gain_agreement_holds_for_p_polarization():
    cfg = parse_config(
        config_text(lambda_count=64, theta_count=24).replace(
            "[grid]", "[model]\npolarization = p\n\n[grid]"
        )
    )
    assert cfg.polarization == "p"
    simp = frequency_angular_spectrum(cfg, "simplified")
    rig = frequency_angular_spectrum(cfg, "rigorous")
    assert compare_grids(simp, rig, "ff") >= 0.999


def test_exchange_symmetry_of_ff_density(experiment_stack):
    # Unnormalized ff density at normal emission is invariant under the
    # signal/idler exchange lam_s <-> lam_i, for the asymmetric stack too.
    from test_simplified import _point_prediction

    for lam_s in (1300.0, 1450.0, 1700.0):
        lam_i = 788.0 * lam_s / (lam_s - 788.0)
        a, _ = _point_prediction(experiment_stack, lam_s, 0.0, 1e-3)
        b, _ = _point_prediction(experiment_stack, lam_i, 0.0, 1e-3)
        assert a["ff"] == pytest.approx(b["ff"], rel=1e-9)


# ---- r_squared -------------------------------------------------------------


def test_r_squared_identical_arrays():
    x = np.array([0.1, 0.5, 1.0, 0.3])
    assert r_squared(x, x) == 1.0


def test_r_squared_mean_reference_is_zero():
    b = np.array([0.0, 0.5, 1.0, 0.5])
    a = np.full(4, np.mean(b))
    # After unit-max normalization of `a` the comparison stays constant.
    assert r_squared(a, b) == pytest.approx(
        1.0 - np.sum((1.0 - b) ** 2) / np.sum((b - 0.5) ** 2)
    )


def test_r_squared_hand_computed_case():
    b = np.array([0.0, 0.5, 1.0, 0.5])
    a = np.array([0.1, 0.4, 1.0, 0.6])
    # residuals 0.01 * 3, variance 0.5 -> 1 - 0.03/0.5
    assert r_squared(a, b) == pytest.approx(0.94, rel=1e-12)


def test_r_squared_zero_variance_error():
    with pytest.raises(ZeroVarianceError):
        r_squared(np.array([1.0, 2.0]), np.array([3.0, 3.0]))


def test_r_squared_mask_excludes_entries():
    b = np.array([0.0, 0.5, 1.0, 0.5])
    a = np.array([0.0, 0.5, 1.0, 99.0])
    mask = np.array([False, False, False, True])
    assert r_squared(a, b, mask=mask) == 1.0


# ---- gain_and_agreement_curve ----------------------------------------------


def test_gain_curve_limits_and_threshold():
    cfg = parse_config(config_text(lambda_count=128, theta_count=2))
    points = gain_and_agreement_curve(cfg, [1e-3, 0.1, 1.0, 2.0, 3.5])
    assert points[0].r_squared > 0.9999
    r2 = [p.r_squared for p in points]
    assert all(r2[i + 1] < r2[i] for i in range(len(r2) - 1))
    for p in points:
        # Agreement persists through the low-gain decade.
        if p.beta_plus_abs ** 2 <= 1e-2:
            assert p.r_squared >= 0.99
        if p.beta_over_half_delta < 1.0:
            assert p.re_gamma_plus == 0.0
        else:
            assert p.re_gamma_plus > 0.0


def test_gain_curve_golden_regression():
    # Frozen from the first verified run; guards against silent drift
    # in any layer of the chain (dispersion, coefficients, both models).
    golden = [
        (0.01, 0.008557868636457768, 0.005285355547882188, 0.0, 0.9999999695260943),
        (0.1, 0.08557868636457769, 0.05285355547882189, 0.0, 0.9997011693019335),
        (1.0, 0.8557868636457768, 0.5285355547882188, 0.0, 0.16174780334669847),
        (2.0, 1.7115737272915537, 1.0570711095764376, 0.5547843716978856, -3.7850246927682853),
    ]
    cfg = parse_config(config_text(lambda_count=128, theta_count=2))
    points = gain_and_agreement_curve(cfg, [g[0] for g in golden])
    for point, (scale, b_abs, b_norm, re_g, rr) in zip(points, golden):
        assert point.beta_plus_abs == pytest.approx(b_abs, rel=1e-9)
        assert point.beta_over_half_delta == pytest.approx(b_norm, rel=1e-9)
        assert point.re_gamma_plus == pytest.approx(re_g, rel=1e-9, abs=1e-12)
        assert point.r_squared == pytest.approx(rr, rel=1e-6)


def test_random_stacks_low_gain_equivalence(rng):
    # The model equivalence is a property of the formalism, not of one
    # geometry: random lossless three-region stacks must agree too.
    for _ in range(5):
        n2 = rng.uniform(1.8, 3.2)
        n1 = rng.uniform(1.0, n2 - 0.1)
        n3 = rng.uniform(1.0, 3.5)
        thickness_um = rng.uniform(4.0, 14.0)
        cfg = parse_config(
            config_text(
                superstrate=f"constant:{n1}",
                film=f"constant:{n2}",
                substrate=f"constant:{n3}",
                thickness_um=repr(thickness_um),
                lambda_min_nm=1200.0,
                lambda_max_nm=2200.0,
                lambda_count=48,
                theta_min_rad=-0.3,
                theta_max_rad=0.3,
                theta_count=12,
            )
        )
        simp = frequency_angular_spectrum(cfg, "simplified")
        rig = frequency_angular_spectrum(cfg, "rigorous")
        keep = ~(simp.mask | rig.mask)
        assert keep.sum() > keep.size // 2
        a = simp.intensity["ff"]
        b = rig.intensity["ff"]
        a = a / np.max(a[keep])
        b = b / np.max(b[keep])
        assert compare_grids(simp, rig, "ff") >= 0.999
        assert np.max(np.abs(a[keep] - b[keep])) <= 1e-2


def test_gain_curve_normalization_reference():
    cfg = parse_config(config_text(lambda_count=64, theta_count=2))
    (point,) = gain_and_agreement_curve(cfg, [0.5])
    # |beta+| = scale * |pump enhancement|; both reported consistently.
    assert point.beta_plus_abs == pytest.approx(
        point.beta_over_half_delta * abs(3.2383322404438462) / 2.0, rel=1e-9
    )


# ---- detection_spectrum ------------------------------------------------------


def test_detection_flat_envelope_recovers_bare_spectrum(small_config):
    lams, rate, mask = detection_spectrum(small_config, "forward", envelope=None)
    grid_cfg = parse_config(
        config_text(lambda_count=96, theta_count=2, theta_min_rad=0.0, theta_max_rad=0.1)
    )
    # Same lambda axis at theta = 0 from the grid engine, first column.
    grid = frequency_angular_spectrum(grid_cfg, "simplified")
    bare = grid.intensity["ff"][:, 0]
    keep = ~mask & ~grid.mask[:, 0]
    assert np.allclose(
        rate[keep] / np.max(rate[keep]), bare[keep] / np.max(bare[keep]), rtol=1e-9
    )
    assert np.max(rate[~mask]) == 1.0


def test_detection_backward_efficiency_bitwise(small_config):
    _, unscaled, _ = detection_spectrum(small_config, "backward", efficiency_ratio=1.0)
    _, scaled, _ = detection_spectrum(small_config, "backward", efficiency_ratio=0.4)
    assert np.array_equal(scaled, 0.4 * unscaled)


def test_detection_split_scheme_scaling(small_config):
    _, unscaled, _ = detection_spectrum(
        small_config, "forward_backward", efficiency_ratio=1.0
    )
    _, scaled, _ = detection_spectrum(
        small_config, "forward_backward", efficiency_ratio=0.25
    )
    assert np.array_equal(scaled, 0.5 * unscaled)


def test_detection_envelope_weighting_symmetric_about_degeneracy():
    # Config whose wavelength axis contains an exact conjugate pair at
    # both ends; with any envelope centered at degeneracy the detected
    # rate is equal on the pair.
    lam_lo = 1376.0
    lam_hi = 788.0 * lam_lo / (lam_lo - 788.0)
    cfg = parse_config(
        config_text(lambda_min_nm=lam_lo, lambda_max_nm=repr(lam_hi), lambda_count=3)
    )
    env = EnvelopeModel(center_nm=1576.0, fwhm_nm=300.0)
    _, rate, mask = detection_spectrum(cfg, "forward", envelope=env)
    assert not mask[0] and not mask[-1]
    assert rate[0] == pytest.approx(rate[-1], rel=1e-9)


def test_envelope_model_shape():
    env = EnvelopeModel(center_nm=1576.0, fwhm_nm=100.0, amplitude=2.0)
    assert env(1576.0) == 2.0
    assert env(1626.0) == pytest.approx(1.0, rel=1e-12)  # half maximum at fwhm/2
    with pytest.raises(ValueError):
        EnvelopeModel(center_nm=1.0, fwhm_nm=-1.0)


# ---- transmission_curve ------------------------------------------------------


def test_transmission_matched_stack_is_unity():
    cfg = parse_config(config_text(lambda_count=64, theta_count=2, **MATCHED_OVERRIDES))
    _, trans, mask = transmission_curve(cfg)
    assert not mask.any()
    assert np.allclose(trans, 1.0, atol=1e-12)


def test_transmission_bounded_for_lossless_stack(small_config):
    _, trans, _ = transmission_curve(small_config)
    assert np.all(trans <= 1.0 + 1e-12)
    assert np.all(trans >= 0.0)
    assert np.ptp(trans) > 0.1  # visible etalon fringes
