import pytest

from steinkit import verify


@pytest.mark.parametrize("suite", sorted(verify.SUITES))
def test_suite_passes(suite):
    results = verify.run_suite(suite, 1e-8)
    assert results
    bad = [r.line() for r in results if not r.passed]
    assert not bad, bad


def test_tolerance_from_environment(monkeypatch):
    monkeypatch.setenv("STEINKIT_TOL", "1e-6")
    assert verify.default_tol() == 1e-6
    monkeypatch.setenv("STEINKIT_TOL", "-1")
    with pytest.raises(ValueError):
        verify.default_tol()


def test_unknown_suite():
    with pytest.raises(ValueError):
        verify.run_suite("nosuch")
