"""A tiny arithmetic language for user-supplied weight functions.

Expressions use ``x``, numeric constants, ``pi``, ``e``, the operators
``+ - * / **`` (``^`` is accepted as a power) and the functions
``sqrt cos sin exp abs``. They are parsed with :mod:`ast` and walked by a
whitelist interpreter, so nothing else in Python is reachable.
"""

import ast

import numpy as np

from .errors import InvalidArgument

_FUNCS = {"sqrt": np.sqrt, "cos": np.cos, "sin": np.sin, "exp": np.exp, "abs": np.abs}
_CONSTS = {"pi": np.pi, "e": np.e}
_BINOPS = {
    ast.Add: np.add,
    ast.Sub: np.subtract,
    ast.Mult: np.multiply,
    ast.Div: np.divide,
    ast.Pow: np.power,
}
_UNOPS = {ast.USub: np.negative, ast.UAdd: np.positive}


def _check(node):
    if isinstance(node, ast.Expression):
        _check(node.body)
    elif isinstance(node, ast.BinOp):
        if type(node.op) not in _BINOPS:
            raise InvalidArgument(f"operator {type(node.op).__name__} not allowed")
        _check(node.left)
        _check(node.right)
    elif isinstance(node, ast.UnaryOp):
        if type(node.op) not in _UNOPS:
            raise InvalidArgument(f"operator {type(node.op).__name__} not allowed")
        _check(node.operand)
    elif isinstance(node, ast.Call):
        if not isinstance(node.func, ast.Name) or node.func.id not in _FUNCS:
            raise InvalidArgument("only sqrt, cos, sin, exp, abs may be called")
        if len(node.args) != 1 or node.keywords:
            raise InvalidArgument(f"{node.func.id} takes exactly one argument")
        _check(node.args[0])
    elif isinstance(node, ast.Name):
        if node.id != "x" and node.id not in _CONSTS:
            raise InvalidArgument(f"unknown name {node.id!r}")
    elif isinstance(node, ast.Constant):
        if isinstance(node.value, bool) or not isinstance(node.value, (int, float)):
            raise InvalidArgument(f"constant {node.value!r} is not a real number")
    else:
        raise InvalidArgument(f"syntax {type(node).__name__} not allowed")


def _eval(node, x):
    if isinstance(node, ast.BinOp):
        return _BINOPS[type(node.op)](_eval(node.left, x), _eval(node.right, x))
    if isinstance(node, ast.UnaryOp):
        return _UNOPS[type(node.op)](_eval(node.operand, x))
    if isinstance(node, ast.Call):
        return _FUNCS[node.func.id](_eval(node.args[0], x))
    if isinstance(node, ast.Name):
        return x if node.id == "x" else _CONSTS[node.id]
    return float(node.value)


def compile_expression(text: str):
    """Return a vectorised callable ``f(x)`` for ``text``."""
    try:
        tree = ast.parse(text.replace("^", "**").strip(), mode="eval")
    except SyntaxError as exc:
        raise InvalidArgument(f"cannot parse weight expression {text!r}: {exc.msg}") from None
    _check(tree)
    body = tree.body

    def f(x):
        x = np.asarray(x, dtype=float)
        return np.broadcast_to(_eval(body, x), x.shape).astype(float)

    return f
