from fractions import Fraction

import pytest

from toda_ward_lab.symbolic import algebra
from toda_ward_lab.symbolic.algebra import Weight
from toda_ward_lab.symbolic.descendants import stress_tensor
from toda_ward_lab.symbolic.symrat import PointKind, probe
from toda_ward_lab.verification.freefield import (
    BoundaryInsertion, BulkInsertion, InsertionConfig, charge_deficit, charge_vector,
    config_from_weights, eval_ff, global_conformal_sum, neutral_symbolic_config, symbolic_context,
    ward_rhs_conformal, ward_rhs_spin3,
)
from toda_ward_lab.utils.errors import ConfigError, NeutralityError


def test_boundary_points_must_increase():
    with pytest.raises(ConfigError):
        InsertionConfig(boundary=(BoundaryInsertion(1.0, Weight(1, 1)), BoundaryInsertion(0.5, Weight(1, 1))),
                        mu_boundary=((0.0, 0.0), (0.0, 0.0)))


def test_boundary_constants_per_arc():
    with pytest.raises(ConfigError):
        InsertionConfig(boundary=(BoundaryInsertion(0.0, Weight(1, 1)),), mu_boundary=((0.0, 0.0), (0.0,)))
    cfg = InsertionConfig(
        boundary=(BoundaryInsertion(-1.0, Weight(1, 1)), BoundaryInsertion(1.0, Weight(1, 1))),
        mu_boundary=((0.1, 0.2), (0.3, 0.4)),
    )
    assert cfg.arc_constant(1, 0) == 0.1
    assert cfg.arc_constant(1, 1) == 0.2
    assert cfg.arc_constant(1, 2) == 0.1
    assert cfg.arc_constant(2, 1) == 0.4


def test_extended_list_order():
    cfg = neutral_symbolic_config(2, 1)
    kinds = [e.kind for e in cfg.extended()]
    assert kinds == [PointKind.BULK, PointKind.BULK, PointKind.BULK_CONJUGATE, PointKind.BULK_CONJUGATE,
                     PointKind.BOUNDARY, PointKind.PROBE]
    assert [e.kind for e in cfg.extended(include_probe=False)][-1] is PointKind.BOUNDARY


@pytest.mark.parametrize("probe_weight", ["auto", "zero", "none"])
def test_symbolic_configs_are_neutral(probe_weight):
    cfg = neutral_symbolic_config(1, 1, probe_weight)
    assert charge_deficit(cfg).is_neutral()
    assert (cfg.probe is None) == (probe_weight == "none")


def test_neutral_config_needs_an_insertion():
    with pytest.raises(ConfigError):
        neutral_symbolic_config(0, 0, "zero")
    with pytest.raises(ConfigError):
        neutral_symbolic_config(1, 1, "sometimes")


def test_evaluation_requires_neutrality():
    ctx = symbolic_context(1, 0)
    cfg = config_from_weights(ctx, [Weight(1, 0)], [], probe_beta=Weight(0, 0))
    assert not charge_deficit(cfg).is_neutral()
    with pytest.raises(NeutralityError):
        eval_ff(stress_tensor(ctx.gamma), probe(), cfg)
    with pytest.raises(NeutralityError):
        charge_vector(1, probe(), cfg)


def test_with_probe_restores_neutrality():
    ctx = symbolic_context(1, 1)
    alpha = ctx.weight(1, 0)
    beta = ctx.weight(Fraction(1, 2), 3)
    cfg = config_from_weights(ctx, [alpha], [beta])
    assert charge_deficit(cfg).is_neutral()
    Q = algebra.background_charge(ctx.gamma)
    expected = 2 * (Q - alpha - beta / 2)
    assert cfg.probe.beta == expected


def test_charge_vector_sums_over_other_points():
    cfg = neutral_symbolic_config(0, 2)
    ctx = cfg.context
    t = ctx.var(probe())
    v1 = charge_vector(1, probe(), cfg)
    expected = ctx.section(0)
    for entry in cfg.extended():
        if entry.kind is PointKind.PROBE:
            continue
        expected = expected + ctx.section(entry.weight.c1) / (2 * (ctx.var(entry.point) - t))
    assert ctx.section(v1.c1) == expected


def test_stress_tensor_pole_structure():
    cfg = neutral_symbolic_config(1, 1, "zero")
    t = cfg.probe.point
    value = eval_ff(stress_tensor(cfg.context.gamma), t, cfg)
    assert (value - ward_rhs_conformal(2, t, cfg)).is_zero()


@pytest.mark.parametrize("rhs, level", [(ward_rhs_conformal, 1), (ward_rhs_spin3, 2)])
def test_ward_rhs_below_minimum_level(rhs, level):
    cfg = neutral_symbolic_config(1, 1, "zero")
    with pytest.raises(ConfigError, match="needs n >="):
        rhs(level, cfg.probe.point, cfg)


@pytest.mark.parametrize("n", [0, 1, 2])
def test_global_conformal_sums_vanish(n):
    cfg = neutral_symbolic_config(1, 1)
    assert global_conformal_sum(n, cfg).is_zero()


def test_numeric_config_charge():
    cfg = InsertionConfig(
        bulk=(BulkInsertion(1j, Weight(1.0, 2.0)),),
        boundary=(BoundaryInsertion(0.0, Weight(2.0, 2.0)),),
        mu_boundary=((0.0,), (0.0,)),
        gamma=0.5,
    )
    total = cfg.total_charge()
    assert (total.c1, total.c2) == (2.0, 3.0)
    deficit = charge_deficit(cfg)
    assert deficit.margin(1) == pytest.approx(2.0 - 4.5)
    assert len(cfg.digest()) == 16
    with_probe = cfg.with_probe(probe(), Weight(0.0, 0.0))
    assert with_probe.digest() != cfg.digest()
    assert with_probe.digest() == cfg.with_probe(probe(), Weight(0.0, 0.0)).digest()
