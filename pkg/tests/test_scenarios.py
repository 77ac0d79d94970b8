"""Scenario composition, built-ins, and the sweep engine."""

import dataclasses
import math

import numpy as np
import pytest

from dressed_tls import (
    PulseSpec,
    Scenario,
    SweepSpec,
    SystemParams,
    builtin,
    builtin_names,
    run_scenario,
    run_sweep,
    with_override,
)


def small_scenario(**kw):
    base = dict(
        name="unit",
        pulse=PulseSpec(envelope="constant", omega_peak=1.0, detuning=1.0),
        system=SystemParams(0.0, 101.0),
        grid_start=0.0,
        grid_stop=5.0,
        grid_points=51,
    )
    base.update(kw)
    return Scenario(**base)


class TestScenarioValidation:
    def test_grid_invariants(self):
        with pytest.raises(ValueError):
            small_scenario(grid_points=1)
        with pytest.raises(ValueError):
            small_scenario(grid_stop=-1.0)

    def test_outputs_validated(self):
        with pytest.raises(ValueError):
            small_scenario(outputs=())
        with pytest.raises(ValueError):
            small_scenario(outputs=("trajectory", "bogus"))

    def test_carrier_derived_from_detuning(self):
        s = small_scenario()
        assert s.carrier == pytest.approx(100.0)

    def test_adiabaticity_window_grid(self):
        s = small_scenario(adiabaticity_window=(1.0, 2.0))
        g = s.adiabaticity_grid()
        assert g[0] == 1.0 and g[-1] == 2.0
        # same point density as the main grid
        assert np.diff(g)[0] == pytest.approx(0.1, rel=1e-12)


class TestRunScenario:
    def test_full_bundle(self):
        b = run_scenario(small_scenario())
        assert b.solution is not None
        assert b.oracle_traj is not None
        assert b.adiabaticity is not None
        assert b.components is not None
        assert b.comparison is not None
        assert b.residual is not None and b.wkb_ratio is not None
        assert b.comparison.margin == b.adiabaticity.margin
        assert b.p_ground is not None and b.virtual_ground_population is not None
        assert b.comparison.max_pop_error < 1e-8  # static exactness

    def test_partial_outputs(self):
        b = run_scenario(small_scenario(outputs=("adiabaticity",)))
        assert b.solution is None and b.oracle_traj is None
        assert b.adiabaticity is not None
        b2 = run_scenario(small_scenario(outputs=("trajectory",)))
        assert b2.solution is not None and b2.comparison is None

    def test_determinism(self):
        a = run_scenario(small_scenario())
        b = run_scenario(small_scenario())
        assert np.array_equal(a.solution.a1, b.solution.a1)
        assert np.array_equal(a.oracle_traj.a2, b.oracle_traj.a2)
        assert a.comparison.max_pop_error == b.comparison.max_pop_error


class TestBuiltins:
    def test_names_and_descriptions(self):
        names = builtin_names()
        assert "static-rabi" in names and "grischkowsky" in names
        assert names == sorted(names)
        for name in names:
            s = builtin(name)
            assert s.name == name
            assert s.description

    def test_unknown_name(self):
        with pytest.raises(KeyError):
            builtin("nope")

    def test_fresh_instances(self):
        assert builtin("static-rabi") is not builtin("static-rabi")

    def test_static_rabi_exactness(self):
        b = run_scenario(builtin("static-rabi"))
        assert b.comparison.max_pop_error < 1e-8

    def test_grischkowsky_unit_bookkeeping(self):
        s = builtin("grischkowsky")
        # detuning of 0.8 1/cm in rad/ps, and a ~ns-scale width
        assert s.pulse.detuning == pytest.approx(0.15069, rel=1e-4)
        assert s.pulse.width == pytest.approx(2500.0, rel=1e-2)
        assert s.metadata["doppler_width_cm"] == 0.04
        assert s.adiabaticity_window is not None


class TestOverrides:
    def test_top_level(self):
        s = with_override(small_scenario(), "grid_points", 11)
        assert s.grid_points == 11

    def test_nested(self):
        s = with_override(small_scenario(), "pulse.omega_peak", 2.5)
        assert s.pulse.omega_peak == 2.5

    def test_unknown_paths(self):
        with pytest.raises(KeyError):
            with_override(small_scenario(), "nope", 1)
        with pytest.raises(KeyError):
            with_override(small_scenario(), "pulse.nope", 1)
        with pytest.raises(KeyError):
            with_override(small_scenario(), "name.nope", 1)


class TestSweep:
    def test_validation(self):
        with pytest.raises(ValueError):
            SweepSpec(base=small_scenario(), parameter="pulse.omega_peak", values=())
        with pytest.raises(ValueError):
            SweepSpec(base=small_scenario(), parameter="pulse.omega_peak",
                      values=(math.inf,))
        with pytest.raises(ValueError):
            SweepSpec(base=small_scenario(), parameter="pulse.omega_peak",
                      values=(1.0,), metrics=("bogus",))

    def test_single_value_sweep_equals_run(self):
        sw = SweepSpec(
            base=small_scenario(),
            parameter="pulse.omega_peak",
            values=(1.0,),
            metrics=("max_pop_error", "margin", "final_pop2"),
        )
        rows = run_sweep(sw)
        assert len(rows) == 1 and rows[0].error is None
        direct = run_scenario(small_scenario())
        assert rows[0].metrics["max_pop_error"] == direct.comparison.max_pop_error
        assert rows[0].metrics["final_pop2"] == pytest.approx(
            abs(direct.solution.a2[-1]) ** 2
        )

    def test_failures_recorded_not_raised(self):
        sw = SweepSpec(
            base=small_scenario(),
            parameter="pulse.omega_peak",
            values=(1.0, -1.0, 2.0),  # the negative peak is invalid
            metrics=("final_pop2",),
        )
        rows = run_sweep(sw)
        assert rows[0].error is None and rows[2].error is None
        assert rows[1].error is not None and "omega_peak" in rows[1].error

    def test_order_independent_of_workers(self):
        sw = SweepSpec(
            base=small_scenario(),
            parameter="pulse.omega_peak",
            values=(0.5, 1.0, 1.5, 2.0),
            metrics=("final_pop2",),
        )
        seq = run_sweep(sw)
        par = run_sweep(dataclasses.replace(sw, workers=3))
        assert [r.value for r in seq] == [r.value for r in par]
        for a, b in zip(seq, par):
            assert a.metrics == b.metrics

    def test_mixing_asymptotics_sweep(self):
        # drive-strength sweep reproduces the weak/strong field limits
        sw = SweepSpec(
            base=small_scenario(),
            parameter="pulse.omega_peak",
            values=(1e-3, 1e3),
            metrics=("final_cos_abs", "final_sin_abs"),
        )
        rows = run_sweep(sw)
        weak, strong = rows[0].metrics, rows[1].metrics
        assert abs(weak["final_cos_abs"] - 1.0) < 1e-5
        assert weak["final_sin_abs"] < 1e-2
        assert abs(strong["final_cos_abs"] - math.sqrt(0.5)) < 5e-4
        assert abs(strong["final_sin_abs"] - math.sqrt(0.5)) < 5e-4
