import math

import numpy as np
import pytest

from steinkit.errors import ExpressionSyntaxError
from steinkit.expression import parse_expression, tokenize


@pytest.mark.parametrize("text,x,want", [
    ("1 + 2*3", 0.0, 7.0),
    ("-x^2", 3.0, -9.0),
    ("2^3^2", 0.0, 512.0),
    ("exp(-x^2/2)", 1.0, math.exp(-0.5)),
    ("sqrt(x) * log(x)", 4.0, 2 * math.log(4)),
    ("(1 + x^2)^(-3)", 1.0, 0.125),
])
def test_evaluation(text, x, want):
    assert float(parse_expression(text)(np.array([x]))[0]) == pytest.approx(want, rel=1e-14)


@pytest.mark.parametrize("text", ["1 +", "x)", "foo(x)", "2 ** ", "", "x $ 2"])
def test_syntax_errors(text):
    with pytest.raises(ExpressionSyntaxError):
        parse_expression(text)


def test_domain_problems_are_reported():
    vals, issues = parse_expression("log(x)").evaluate_checked(np.array([-1.0, 1.0]))
    assert issues and vals[1] == 0.0


def test_tokens():
    kinds = [t.kind for t in tokenize("2.5e-1*x")]
    assert kinds[:3] == ["num", "op", "name"]
