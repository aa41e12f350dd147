from dataclasses import replace

import numpy as np
import pytest
from scipy import integrate, special

from toda_ward_lab.simulation import fieldsim
from toda_ward_lab.simulation.fieldsim import Estimate, FusionFit, McParams
from toda_ward_lab.symbolic.algebra import Weight
from toda_ward_lab.verification.freefield import BoundaryInsertion, BulkInsertion, InsertionConfig
from toda_ward_lab.utils.errors import ConfigError, NeutralityError, NumericError, SeibergError


# Parameters and bookkeeping

def test_params_validation():
    with pytest.raises(ConfigError):
        McParams(samples=3, chains=4)
    with pytest.raises(ConfigError):
        McParams(seed=-1)
    with pytest.raises(ConfigError):
        McParams(delta=5.0, box_radius=4.0)
    with pytest.raises(ConfigError):
        McParams(bulk_grid=(0, 4))
    with pytest.raises(ConfigError):
        McParams(regularization=0.0)
    params = McParams(box_radius=2.0, boundary_points=40)
    assert params.lattice_spacing == pytest.approx(0.1)
    assert params.to_dict()["bulk_grid"] == list(params.bulk_grid)


def test_chain_split_and_generators():
    assert fieldsim.chain_counts(10, 3) == [4, 3, 3]
    first = [g.standard_normal(3) for g in fieldsim.chain_generators(42, 2)]
    second = [g.standard_normal(3) for g in fieldsim.chain_generators(42, 2)]
    assert all(np.array_equal(a, b) for a, b in zip(first, second))
    assert not np.array_equal(first[0], first[1])


def test_estimate_from_chains():
    est = Estimate.from_chains([np.array([1.0, 2.0]), np.array([3.0, 4.0, 5.0])], complex_valued=False)
    assert est.value == pytest.approx(3.0)
    assert est.stderr == pytest.approx(np.sqrt(2.5 / 5))
    assert est.diagnostics["samples"] == 5
    assert est.diagnostics["chains"] == 2
    assert list(est.chain_means) == [1.5, 4.0]
    assert not est.compatible_with_zero()
    assert est.compatible_with_zero(atol=3.0)


def test_estimate_rows_cover_chains_and_components():
    est = Estimate.from_chains([np.ones((2, 2)), np.zeros((2, 2))], complex_valued=False)
    est.terms["aux"] = Estimate.from_chains([np.ones(2), np.ones(2)], complex_valued=False)
    rows = fieldsim.estimate_rows("kpz", est)
    terms = {r["term"] for r in rows}
    assert terms == {"kpz[1]", "kpz[2]", "aux"}
    assert sum(1 for r in rows if r["chain"] == "all") == 3
    assert all(set(r) == {"term", "chain", "value_re", "value_im", "stderr"} for r in rows)


def test_exact_zero_estimate():
    est = Estimate.exact_zero((2,), 3, {"degenerate": True})
    assert est.compatible_with_zero()
    assert est.to_dict()["ess"] is None


# Geometry and Seiberg bounds

def test_geometry_layout(interacting_config):
    geom = fieldsim.geometry(interacting_config)
    assert list(geom.is_bulk) == [True, False, False]
    assert np.allclose(geom.charges[1], [1.0, 1.0])
    q = 0.6 + 2 / 0.6
    assert np.allclose(geom.deficit, 3.0 + 1.0 + 1.0 - q)
    assert np.allclose(geom.marks, [-0.5, 0.8])
    assert not geom.is_free and not geom.complex_valued


def test_symbolic_config_is_rejected():
    from toda_ward_lab.verification.freefield import neutral_symbolic_config
    with pytest.raises(ConfigError):
        fieldsim.geometry(neutral_symbolic_config(1, 1))


def test_lower_half_plane_is_rejected():
    cfg = InsertionConfig(bulk=(BulkInsertion(0.2 - 0.5j, Weight(3.0, 3.0)),), gamma=0.6)
    with pytest.raises(ConfigError):
        fieldsim.geometry(cfg)


def test_seiberg_bounds(interacting_config):
    fieldsim.check_seiberg(interacting_config)
    too_heavy = replace(interacting_config, bulk=(BulkInsertion(0.3 + 1.0j, Weight(5.0, 5.0)),))
    with pytest.raises(SeibergError) as excinfo:
        fieldsim.check_seiberg(too_heavy)
    assert "α1" in excinfo.value.inequality
    too_light = replace(interacting_config, bulk=(BulkInsertion(0.3 + 1.0j, Weight(1.0, 1.0)),))
    with pytest.raises(SeibergError) as excinfo:
        fieldsim.check_seiberg(too_light)
    assert "ω1" in excinfo.value.inequality
    no_bulk_potential = replace(interacting_config, mu_bulk=(0.0, 1.0))
    with pytest.raises(SeibergError) as excinfo:
        fieldsim.check_seiberg(no_bulk_potential)
    assert excinfo.value.inequality == "μB1 ≤ 0"
    negative_arc = replace(interacting_config, mu_boundary=((0.5, -0.5), (0.5, 0.5)))
    with pytest.raises(SeibergError, match="Re μ1,2 < 0"):
        fieldsim.check_seiberg(negative_arc)


def test_log_prefactor_is_translation_invariant_without_plus_norms():
    # insertions inside the unit disc keep |x|_+ = 1 before and after a small shift
    cfg = InsertionConfig(
        bulk=(BulkInsertion(0.1 + 0.5j, Weight(1.0, 0.5)),),
        boundary=(BoundaryInsertion(-0.3, Weight(0.5, 1.0)), BoundaryInsertion(0.2, Weight(1.0, 1.0))),
        mu_boundary=((0.0, 0.0), (0.0, 0.0)),
        gamma=0.6,
    )
    geom = fieldsim.geometry(cfg)
    shifted = replace(geom, points=geom.points + 0.05)
    assert fieldsim.log_prefactor(shifted) == pytest.approx(fieldsim.log_prefactor(geom))


# Zero mode

def test_zero_mode_closed_form():
    a = np.array([0.5, 2.0])
    values, bound = fieldsim.zero_mode_integral(a, np.zeros(2), s=1.2, gamma=0.6, mu=1.5)
    kappa = 1.2 / 0.6
    assert np.allclose(values.real, special.gamma(kappa) / 0.6 * (1.5 * a) ** -kappa)
    assert bound == 0.0


@pytest.mark.parametrize("b", [0.5, 2.0 + 0.5j])
def test_zero_mode_with_boundary_mass(b):
    s, gamma, mu, a = 1.0, 0.6, 1.0, 0.8
    values, bound = fieldsim.zero_mode_integral(np.array([a]), np.array([b]), s, gamma, mu)
    kappa = s / gamma

    def part(y, fn):
        return fn(y ** (kappa - 1) * np.exp(-mu * a * y - b * np.sqrt(y))) / gamma

    expected = (integrate.quad(part, 0, np.inf, args=(np.real,), limit=200)[0]
                + 1j * integrate.quad(part, 0, np.inf, args=(np.imag,), limit=200)[0])
    assert values[0] == pytest.approx(expected, rel=1e-6)
    assert bound <= 1e-8


def test_zero_mode_errors():
    with pytest.raises(NumericError):
        fieldsim.zero_mode_integral(np.ones(1), np.zeros(1), s=0.0, gamma=0.6, mu=1.0)
    with pytest.raises(NumericError):
        fieldsim.zero_mode_integral(np.ones(1), np.ones(1), s=1.0, gamma=0.6, mu=0.0)
    with pytest.raises(NumericError):
        fieldsim.zero_mode_integral(np.ones(1), np.ones(1), s=1.0, gamma=0.6, mu=1.0,
                                    points=11, radius=2.0, tolerance=1e-12)


# Estimators

def test_correlator_is_reproducible(interacting_config, small_params):
    first = fieldsim.estimate_correlator(interacting_config, small_params)
    second = fieldsim.estimate_correlator(interacting_config, small_params)
    assert first.value == second.value
    assert first.stderr == second.stderr
    assert first.value > 0
    assert first.diagnostics["samples"] == small_params.samples
    assert first.diagnostics["tail_bound"] <= small_params.tail_tolerance


def test_seed_changes_the_estimate(interacting_config, small_params):
    first = fieldsim.estimate_correlator(interacting_config, small_params)
    other = fieldsim.estimate_correlator(interacting_config, replace(small_params, seed=8))
    assert first.value != other.value


def test_complex_boundary_constants_give_complex_correlators(interacting_config, small_params):
    cfg = replace(interacting_config, mu_boundary=((0.5 + 0.3j, 0.5), (0.5, 0.5 - 0.2j)))
    est = fieldsim.estimate_correlator(cfg, small_params)
    assert isinstance(est.value, complex)


def test_chaos_normalization(interacting_config, small_params):
    est = fieldsim.chaos_normalization(interacting_config, replace(small_params, samples=256))
    assert abs(est.value - 1.0) <= 5 * est.stderr
    assert set(est.terms) == {"bulk", "boundary"}


def test_kpz_identity(interacting_config, small_params):
    est = fieldsim.kpz_residual(interacting_config, small_params)
    assert np.shape(est.value) == (2,)
    assert set(est.terms) >= {"s_term", "bulk_term", "boundary_term", "correlator"}
    assert fieldsim.kpz_passed(est)


def test_kpz_identity_without_boundary(bulk_only_config, small_params):
    est = fieldsim.kpz_residual(bulk_only_config, small_params)
    assert fieldsim.kpz_passed(est)
    assert np.allclose(est.terms["boundary_term"].value, 0.0)


def test_kpz_is_degenerate_for_free_neutral_configs(free_neutral_config, small_params):
    est = fieldsim.kpz_residual(free_neutral_config, small_params)
    assert est.diagnostics["degenerate"]
    assert fieldsim.kpz_passed(est)


def test_identity_map_gives_exact_covariance(interacting_config, small_params):
    est = fieldsim.covariance_residual(interacting_config, (1.0, 0.0, 0.0, 1.0), small_params)
    assert est.value == pytest.approx(0.0, abs=1e-12)
    assert est.diagnostics["jacobian"] == pytest.approx(1.0)
    assert fieldsim.covariance_passed(est)


def test_translation_keeps_unit_jacobian(interacting_config, small_params):
    est = fieldsim.covariance_residual(interacting_config, (1.0, 0.25, 0.0, 1.0), small_params)
    assert est.diagnostics["jacobian"] == pytest.approx(1.0)
    assert np.isfinite(est.value)
    assert set(est.terms) == {"original", "mapped"}


def test_mobius_determinant_is_checked(interacting_config, small_params):
    with pytest.raises(ConfigError):
        fieldsim.covariance_residual(interacting_config, (2.0, 0.0, 0.0, 1.0), small_params)


def test_mu_derivative(bulk_only_config, small_params):
    est = fieldsim.mu_derivative_residual(bulk_only_config, small_params)
    assert est.diagnostics["step"] == pytest.approx(1e-3)
    assert fieldsim.mu_derivative_passed(est)
    with pytest.raises(ConfigError):
        fieldsim.mu_derivative_residual(bulk_only_config, small_params, step=2.0)


# Fusion

def test_separation_ladder():
    ladder = fieldsim.separation_ladder(0.05, 0.4, 4)
    assert ladder[0] == pytest.approx(0.05) and ladder[-1] == pytest.approx(0.4)
    assert np.allclose(np.diff(np.log(ladder)), np.log(2.0))
    with pytest.raises(ConfigError):
        fieldsim.separation_ladder(0.4, 0.05, 4)
    with pytest.raises(ConfigError):
        fieldsim.separation_ladder(0.05, 0.4, 2)


def test_fusion_pair_validation(interacting_config, small_params):
    with pytest.raises(ConfigError):
        fieldsim.fusion_exponent(interacting_config, (0, 1), [0.1, 0.2, 0.4], small_params)
    with pytest.raises(ConfigError):
        fieldsim.fusion_exponent(interacting_config, (1, 1), [0.1, 0.2, 0.4], small_params)
    with pytest.raises(ConfigError):
        fieldsim.fusion_exponent(interacting_config, (2, 1), [0.5, 1.0, 2.0], small_params)


def test_fusion_verdict():
    fit = FusionFit((1, 2), slope=-1.9, intercept=0.0, ci_low=-2.0, ci_high=-1.8, expected=-2.0,
                    separations=[0.1, 0.2, 0.4], estimates=[])
    assert fit.passed
    assert not replace(fit, slope=-2.5).passed
    assert fit.to_dict()["ci"] == [-2.0, -1.8]


# Stress tensor

def test_stress_oracle_is_finite(free_neutral_config):
    value = fieldsim.free_field_stress_oracle(free_neutral_config, 0.2)
    assert np.isfinite(value)


def test_free_field_stress_tensor(free_neutral_config, small_params):
    est = fieldsim.ward_T_mc(free_neutral_config, 0.2, replace(small_params, samples=400))
    assert est.diagnostics["mode"] == "free-field"
    assert est.diagnostics["oracle"] == pytest.approx(est.diagnostics["rhs"], rel=1e-4, abs=1e-6)
    assert fieldsim.ward_t_passed(est)


def test_stress_probe_must_avoid_insertions(free_neutral_config, small_params):
    with pytest.raises(ConfigError):
        fieldsim.ward_T_mc(free_neutral_config, 0.8, small_params)


def test_free_mode_requires_neutrality(free_neutral_config, small_params):
    heavy = replace(free_neutral_config, bulk=(BulkInsertion(0.3 + 1.0j, Weight(2.0, 2.0)),))
    with pytest.raises(NeutralityError):
        fieldsim.ward_T_mc(heavy, 0.2, small_params)
    with pytest.raises(NeutralityError):
        fieldsim.stress_decay_exponent(heavy)


def test_stress_tensor_decay(free_neutral_config, interacting_config):
    assert fieldsim.stress_decay_exponent(free_neutral_config) == pytest.approx(-4.0, abs=0.2)
    with pytest.raises(ConfigError):
        fieldsim.stress_decay_exponent(interacting_config)


# Acceptance-scale runs

@pytest.mark.slow
def test_interacting_stress_tensor(interacting_config):
    params = McParams(samples=2000, chains=4)
    est = fieldsim.ward_T_mc(interacting_config, 0.2, params)
    assert est.diagnostics["mode"] == "interacting"
    assert fieldsim.ward_t_passed(est)


@pytest.mark.slow
def test_boundary_fusion_exponent(interacting_config):
    params = McParams(samples=4000, chains=4, boundary_points=64)
    ladder = fieldsim.separation_ladder(0.15, 0.6, 5)
    fit = fieldsim.fusion_exponent(interacting_config, (1, 2), ladder, params)
    assert fit.expected == pytest.approx(-4.0)
    assert fit.passed


@pytest.mark.slow
def test_translation_covariance(interacting_config):
    params = McParams(samples=4000, chains=4)
    est = fieldsim.covariance_residual(interacting_config, (1.0, 0.25, 0.0, 1.0), params)
    assert est.compatible_with_zero(multiplier=4.0)
