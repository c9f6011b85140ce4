import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import fd_gradient, fd_hessian, random_expression, reference_value
from statgeom.expr import (
    Add,
    BinOp,
    Call,
    Const,
    Coord,
    ExprDomainError,
    ExprSyntaxError,
    Neg,
    Pow,
    array_jet,
    array_value,
    eval_jet,
    eval_value,
    parse_array,
    parse_expr,
    to_source,
)

X4 = ("x1", "x2", "x3", "x4")


# ------------------------------------------------------------------ parsing


def test_metric_component_tree_shape():
    t = parse_expr("1+exp(-x1+x3)", X4)
    assert t == Add(Const(1.0), Call("exp", Add(Neg(Coord(0, "x1")), Coord(2, "x3"))))


def test_single_coordinate():
    assert parse_expr("x1", X4) == Coord(0, "x1")


def test_power_is_right_associative():
    t = parse_expr("x1^x2^2", X4)
    assert t == Pow(Coord(0, "x1"), Pow(Coord(1, "x2"), Const(2.0)))
    # the two groupings differ at (2, 3): 2^9 = 512 versus (2^3)^2 = 64
    assert eval_value(t, [2.0, 3.0, 0.0, 0.0]) == 512.0
    assert reference_value("x1^x2^2", X4, [2, 3, 0, 0]) == 512.0


def test_power_binds_tighter_than_unary_minus():
    t = parse_expr("-x1^2", X4)
    assert t == Neg(Pow(Coord(0, "x1"), Const(2.0)))
    assert eval_value(t, [3.0, 0, 0, 0]) == -9.0


def test_unary_minus_binds_tighter_than_product():
    t = parse_expr("-x1*x2", X4)
    assert t == BinOp("*", Neg(Coord(0, "x1")), Coord(1, "x2"))


def test_scientific_literals_and_whitespace():
    assert parse_expr("  1.5e-3 *  x2 ", X4) == BinOp("*", Const(1.5e-3), Coord(1, "x2"))
    assert parse_expr(".5", X4) == Const(0.5)


def test_constants_become_literal_nodes():
    assert parse_expr("r^2", ("th",), {"r": 2.0}) == Pow(Const(2.0), Const(2.0))


@pytest.mark.parametrize(
    "src, offset",
    [("(x1", 3), ("x1 x2", 3), ("x1 +", 4), ("", 0), ("x1 $ 2", 3), ("exp x1", 4), ("1+*x1", 2)],
)
def test_syntax_errors_carry_byte_offsets(src, offset):
    with pytest.raises(ExprSyntaxError) as info:
        parse_expr(src, X4)
    assert info.value.offset == offset


def test_byte_offset_counts_utf8_bytes():
    with pytest.raises(ExprSyntaxError) as info:
        parse_expr("x1 + é", X4)
    assert info.value.offset == 5
    with pytest.raises(ExprSyntaxError) as info:
        parse_expr("éé + x1", X4)
    assert info.value.offset == 0


def test_unknown_identifier_and_function():
    with pytest.raises(ExprSyntaxError, match="unknown identifier 'y'"):
        parse_expr("y + 1", X4)
    with pytest.raises(ExprSyntaxError, match="unknown function 'tan'"):
        parse_expr("tan(x1)", X4)
    # log is not part of the function set; ln is
    with pytest.raises(ExprSyntaxError):
        parse_expr("log(x1)", X4)


@pytest.mark.parametrize("seed", range(60))
def test_print_then_parse_is_identity(seed):
    rng = np.random.default_rng(seed)
    t = parse_expr(random_expression(rng, X4, depth=4), X4)
    assert parse_expr(to_source(t), X4) == t


@given(st.integers(0, 10_000))
def test_print_parse_roundtrip_property(seed):
    rng = np.random.default_rng(seed)
    t = parse_expr(random_expression(rng, ("u", "v"), depth=3), ("u", "v"))
    t2 = parse_expr(to_source(t), ("u", "v"))
    assert t2 == t
    assert parse_expr(to_source(t2), ("u", "v")) == t2


# --------------------------------------------------------------- evaluation


def test_exponential_jet_at_origin():
    j = eval_jet(parse_expr("exp(-x1+x3)", X4), np.zeros(4))
    assert j.value == 1.0
    np.testing.assert_array_equal(j.gradient, [-1, 0, 1, 0])
    h = np.zeros((4, 4))
    h[0, 0] = h[2, 2] = 1
    h[0, 2] = h[2, 0] = -1
    np.testing.assert_array_equal(j.hessian, h)


def test_metric_component_value_at_origin():
    assert eval_jet(parse_expr("1+exp(-x1+x3)", X4), np.zeros(4)).value == 2.0
    assert eval_value(parse_expr("exp(x1-x3)", X4), np.zeros(4)) == 1.0


def test_constant_everywhere():
    t = parse_expr("3", X4)
    pts = np.random.default_rng(0).uniform(-5, 5, (7, 4))
    np.testing.assert_array_equal(eval_value(t, pts), np.full(7, 3.0))
    j = eval_jet(t, pts)
    assert not j.gradient.any() and not j.hessian.any()


@pytest.mark.parametrize(
    "src, point, message",
    [
        ("ln(x1)", [-1.0], "logarithm"),
        ("ln(x1)", [0.0], "logarithm"),
        ("sqrt(x1)", [-0.5], "square root"),
        ("1/x1", [0.0], "division by zero"),
        ("x1^0.5", [-1.0], "non-integer power"),
    ],
)
def test_domain_errors_name_point_and_subexpression(src, point, message):
    t = parse_expr(src, ("x1",))
    for ev in (eval_value, eval_jet):
        with pytest.raises(ExprDomainError) as info:
            ev(t, point)
        text = str(info.value)
        assert message in text
        assert f"{point[0]:g}" in text
        assert "x1" in text


def test_sqrt_at_zero_value_is_a_domain_error_for_jets():
    # the derivative of sqrt is unbounded at 0, so a jet cannot be formed
    with pytest.raises(ExprDomainError):
        eval_jet(parse_expr("sqrt(x1)", ("x1",)), [0.0])


def test_integer_powers_of_negative_bases():
    t = parse_expr("x1^3", ("x1",))
    assert eval_value(t, [-2.0]) == -8.0
    j = eval_jet(t, [-2.0])
    assert j.gradient[0] == 12.0 and j.hessian[0, 0] == -12.0


def test_coordinate_index_out_of_range():
    t = parse_expr("x3", X4)
    with pytest.raises(ValueError):
        eval_value(t, [0.0, 0.0])


@pytest.mark.parametrize("seed", range(40))
def test_values_match_reference_interpreter(seed):
    rng = np.random.default_rng(1000 + seed)
    src = random_expression(rng, X4, depth=3)
    p = rng.uniform(-1, 1, 4)
    ours = eval_value(parse_expr(src, X4), p)
    ref = reference_value(src, X4, p)
    assert ours == pytest.approx(ref, rel=1e-12, abs=1e-12)


@pytest.mark.parametrize("seed", range(100))
def test_gradient_matches_finite_differences(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 5))
    coords = X4[:n]
    t = parse_expr(random_expression(rng, coords, depth=3), coords)
    p = rng.uniform(-1, 1, n)
    j = eval_jet(t, p)
    fd = fd_gradient(lambda q: eval_value(t, q), p, 1e-5)
    scale = max(1.0, float(np.max(np.abs(fd))))
    assert np.max(np.abs(j.gradient - fd)) <= 1e-7 * scale


@given(st.integers(0, 2**31 - 1))
def test_hessian_exactly_symmetric_and_value_bitwise_equal(seed):
    rng = np.random.default_rng(seed)
    t = parse_expr(random_expression(rng, X4, depth=4), X4)
    pts = rng.uniform(-1, 1, (5, 4))
    j = eval_jet(t, pts)
    np.testing.assert_array_equal(j.hessian, np.swapaxes(j.hessian, 1, 2))
    np.testing.assert_array_equal(j.value, eval_value(t, pts))


@given(st.integers(0, 2**31 - 1))
def test_jet_agrees_with_finite_differences_property(seed):
    rng = np.random.default_rng(seed)
    coords = ("u", "v", "w")
    t = parse_expr(random_expression(rng, coords, depth=3), coords)
    p = rng.uniform(-1, 1, 3)
    j = eval_jet(t, p)
    f = lambda q: eval_value(t, q)  # noqa: E731
    assert np.max(np.abs(j.gradient - fd_gradient(f, p, 1e-5))) < 1e-6
    assert np.max(np.abs(j.hessian - fd_hessian(f, p, 1e-4))) < 1e-6


def test_jet_of_each_function_against_closed_forms():
    p = 0.3
    cases = {
        "exp(x1)": (math.exp(p), math.exp(p), math.exp(p)),
        "ln(x1)": (math.log(p), 1 / p, -1 / p**2),
        "sin(x1)": (math.sin(p), math.cos(p), -math.sin(p)),
        "cos(x1)": (math.cos(p), -math.sin(p), -math.cos(p)),
        "sinh(x1)": (math.sinh(p), math.cosh(p), math.sinh(p)),
        "cosh(x1)": (math.cosh(p), math.sinh(p), math.cosh(p)),
        "sqrt(x1)": (math.sqrt(p), 0.5 / math.sqrt(p), -0.25 * p**-1.5),
        "x1^2.5": (p**2.5, 2.5 * p**1.5, 3.75 * p**0.5),
        "2^x1": (2**p, math.log(2) * 2**p, math.log(2) ** 2 * 2**p),
        "1/x1": (1 / p, -1 / p**2, 2 / p**3),
    }
    for src, (v, d1, d2) in cases.items():
        j = eval_jet(parse_expr(src, ("x1",)), [p])
        assert j.value == pytest.approx(v, rel=1e-14), src
        assert j.gradient[0] == pytest.approx(d1, rel=1e-13), src
        assert j.hessian[0, 0] == pytest.approx(d2, rel=1e-13), src


def test_array_helpers_shapes():
    trees = parse_array([["x1", 0], [1, "x2^2"]], ("x1", "x2"))
    pts = np.array([[1.0, 2.0], [3.0, -1.0], [0.0, 0.5]])
    v = array_value(trees, pts)
    assert v.shape == (3, 2, 2)
    np.testing.assert_array_equal(v[:, 1, 1], [4.0, 1.0, 0.25])
    v2, g, h = array_jet(trees, pts)
    np.testing.assert_array_equal(v, v2)
    assert g.shape == (3, 2, 2, 2) and h.shape == (3, 2, 2, 2, 2)
    np.testing.assert_array_equal(g[:, 1, 1, 1], 2 * pts[:, 1])
