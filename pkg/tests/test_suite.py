import pytest

from fbiharm import suite
from fbiharm.errors import InvalidInput, SingularEvaluation
from fbiharm.numdiff import DEFAULT_FD, RADIAL_FD
from fbiharm.suite import Check, SuiteContext


def constant(value):
    return lambda ctx: value


def test_expectations():
    assert Check('z', constant(0.0), 1e-6).passes(1e-7)
    assert not Check('z', constant(0.0), 1e-6).passes(1e-5)
    assert Check('n', constant(0.0), 1e-3, 'nonzero').passes(1.0)
    assert not Check('n', constant(0.0), 1e-3, 'nonzero').passes(1e-4)
    assert Check('a', constant(0.0), 1.9, 'at_least').passes(2.0)


def test_tolerance_overrides_zero_gates_only():
    assert not Check('z', constant(0.0), 1e-6).passes(1e-7, tolerance=1e-8)
    assert Check('n', constant(0.0), 1e-3, 'nonzero').passes(1.0, tolerance=1e-8)


def test_unknown_expectation():
    with pytest.raises(InvalidInput):
        Check('x', constant(0.0), 1.0, 'positive')


def test_run_check_turns_errors_into_failures():
    def boom(ctx):
        raise SingularEvaluation('too close')

    result = suite.run_check(Check('boom', boom, 1.0), SuiteContext())
    assert result.verdict == 'fail'
    assert result.max_residual is None
    assert result.error == 'too close'


def test_run_check_rejects_non_finite():
    result = suite.run_check(Check('nan', constant(float('nan')), 1.0), SuiteContext())
    assert result.verdict == 'fail'


def test_context_scales_every_preset():
    ctx = SuiteContext.for_step(2e-3, seed=5)
    assert ctx.default.step == pytest.approx(2 * DEFAULT_FD.step)
    assert ctx.radial.wide_step == pytest.approx(2 * RADIAL_FD.wide_step)
    assert ctx.seed == 5
    assert SuiteContext.for_step() == SuiteContext()


def test_anchors_are_unique():
    anchors = [check.anchor for check in suite.CHECKS]
    assert len(anchors) == len(set(anchors))


def test_run_suite_subset():
    checks = [c for c in suite.CHECKS if c.anchor.startswith(('Δ', 'tension of x'))]
    results = suite.run_suite(checks=checks)
    assert len(results) == 4
    assert all(r.verdict == 'pass' for r in results)
    assert results[0].to_dict() == {'anchor': checks[0].anchor,
                                    'max_residual': results[0].max_residual,
                                    'verdict': 'pass',
                                    'gate': checks[0].gate}


def test_tight_tolerance_fails_subset():
    checks = [c for c in suite.CHECKS if c.anchor.startswith('tension of x')]
    assert suite.run_suite(tolerance=1e-16, checks=checks)[0].verdict == 'fail'


def test_run_tolerance_replaces_only_zero_gates():
    zero = Check('zero', constant(0.0), 1e-6)
    nonzero = Check('nonzero', constant(1.0), 1e-3, 'nonzero')
    assert zero.effective_gate() == 1e-6
    assert zero.effective_gate(1e-9) == 1e-9
    assert nonzero.effective_gate(1e-9) == 1e-3
    results = suite.run_suite(tolerance=1e-9, checks=[zero, nonzero])
    assert [r.gate for r in results] == [1e-9, 1e-3]
    assert [r.verdict for r in results] == ['pass', 'pass']
