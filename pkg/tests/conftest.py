import pytest
import sympy
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from lgcluster.exactalg import LaurentPoly

settings.register_profile("ci", derandomize=True, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("ci")


def laurent_polys(nvars, max_terms=4, max_exp=3, max_coeff=5, nonzero=False):
    exps = st.tuples(*[st.integers(-max_exp, max_exp)] * nvars)
    coeffs = st.integers(-max_coeff, max_coeff).filter(bool)
    terms = st.dictionaries(exps, coeffs, min_size=1 if nonzero else 0, max_size=max_terms)
    return terms.map(lambda t: LaurentPoly(nvars, t))


def sym_vars(n, name="x"):
    return sympy.symbols(f"{name}1:{n + 1}")


def to_sympy(f, xs):
    out = sympy.Integer(0)
    for e, c in f.items():
        term = sympy.Integer(c)
        for x, k in zip(xs, e):
            term *= x ** k
        out += term
    return out


_CRITERIA: dict[int, tuple[bool, str]] = {}


class CriterionRecorder:
    def __call__(self, number, ok, detail):
        _CRITERIA[number] = (bool(ok), detail)
        print(f"criterion {number}: {'PASS' if ok else 'FAIL'} ({detail})")


@pytest.fixture
def criterion():
    return CriterionRecorder()


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        ok, detail = _CRITERIA[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if ok else 'FAIL'} ({detail})")
