import numpy as np
import pytest

from moninv import expr


def ev(text, x=(), u=(), d=()):
    return expr.evaluate(expr.parse(text), x, u, d)


class TestEvaluate:
    def test_affine_row(self):
        # 1.2*50 + 0.1*25 + 0.2
        assert ev("1.2*x1 + 0.1*x2 + d1", x=(50, 25), d=(0.2,)) == 62.7

    def test_precedence(self):
        assert ev("2 + 3 * 4") == 14.0
        assert ev("(2 + 3) * 4") == 20.0
        assert ev("2 - 3 - 4") == -5.0
        assert ev("8 / 2 / 2") == 2.0

    def test_unary_minus(self):
        assert ev("-x1", x=(3,)) == -3.0
        assert ev("4 - -2") == 6.0

    def test_min_max(self):
        assert ev("min(3, 2)") == 2.0
        assert ev("max(u1 - 5, 0)", u=(3,)) == 0.0
        assert ev("max(1, 2, 3)") == 3.0

    def test_scientific_literals(self):
        assert ev("1.5e2 + 1e-3") == 150.001


class TestErrors:
    def test_trailing_operator(self):
        with pytest.raises(expr.ExprError) as err:
            expr.parse("x1 +")
        assert err.value.col == 5

    def test_unknown_identifier(self):
        with pytest.raises(expr.ExprError, match="unknown identifier"):
            expr.parse("foo + 1")

    def test_out_of_range_coordinate(self):
        node = expr.parse("x3")
        with pytest.raises(expr.ExprError, match="x3 exceeds"):
            expr.check_vars(node, {"x": 2, "u": 1, "d": 1})

    def test_malformed_call(self):
        with pytest.raises(expr.ExprError):
            expr.parse("min(1)")
        with pytest.raises(expr.ExprError):
            expr.parse("min(1, 2")

    def test_unexpected_character(self):
        with pytest.raises(expr.ExprError):
            expr.parse("x1 @ 2")

    def test_line_is_propagated(self):
        with pytest.raises(expr.ExprError) as err:
            expr.parse("x1 + + 2", line=7)
        assert err.value.line == 7


def test_pretty_roundtrip_evaluates_identically():
    sources = [
        "1.2*x1 + 0.1*x2 + d1",
        "max(u1 - 51.0709, 0)",
        "x1 - 0.5*(x2/3 - d1) + min(u1, x1*x2)",
        "-x1 + -(x2 - 1)",
    ]
    rng = np.random.default_rng(0)
    for src in sources:
        node = expr.parse(src)
        again = expr.parse(expr.to_source(node))
        for _ in range(100):
            x = tuple(rng.uniform(-5, 5, 2))
            u = tuple(rng.uniform(-5, 5, 1))
            d = tuple(rng.uniform(-5, 5, 1))
            assert expr.evaluate(node, x, u, d) == expr.evaluate(again, x, u, d)
