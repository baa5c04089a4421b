#
# This file is part of Python package: `secbw`
#
#     https://github.com/rmvanhees/secbw.git
#
# Copyright (c) 2026 - R.M. van Hees (SRON)
#    All rights reserved.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
#
"""Convert configuration values with physical units to SI.

Configuration values are written with their unit, e.g. "23 dBm",
"-174 dBm/Hz", "10 MHz" or "0.8 Mbps". The numerical part may be a simple
arithmetic expression ("2 * 10**4"), which is evaluated securely with module
`ast`.
"""

from __future__ import annotations

__all__ = ["eval_number", "to_si"]

import ast
import operator
import re

# - global parameters ---------------------------------
ALLOWED_OPERATORS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: operator.pow,
    ast.USub: operator.neg,
    ast.UAdd: operator.pos,
}

# multiplicative factors of the linear units, per quantity
LINEAR_UNITS = {
    "power": {"W": 1.0, "mW": 1e-3},
    "bandwidth": {"Hz": 1.0, "kHz": 1e3, "MHz": 1e6, "GHz": 1e9},
    "density": {"W/Hz": 1.0},
    "rate": {"bps": 1.0, "kbps": 1e3, "Mbps": 1e6},
    "distance": {"m": 1.0, "km": 1e3},
    "fraction": {"%": 1e-2, "": 1.0},
    "count": {"": 1.0},
}

VALUE_PATTERN = re.compile(r"^\s*(?P<number>.*?)\s*(?P<unit>[A-Za-z%/]+)?\s*$")


# - main functions -------------------------------------
def eval_number(expr: str | float) -> int | float:
    """Evaluate simple arithmetic expressions securely.

    Parameters
    ----------
    expr :  str | float
       number or expression using +, -, *, / and ** on numeric literals

    Returns
    -------
    int | float
       value of the expression

    """
    if isinstance(expr, int | float) and not isinstance(expr, bool):
        return expr

    def eval_node(node: ast.AST) -> int | float:
        """Perform the actual evaluation, using module `ast`."""
        if isinstance(node, ast.BinOp):
            left = eval_node(node.left)
            right = eval_node(node.right)
            return ALLOWED_OPERATORS[type(node.op)](left, right)

        if isinstance(node, ast.UnaryOp):
            operand = eval_node(node.operand)
            return ALLOWED_OPERATORS[type(node.op)](operand)

        if isinstance(node, ast.Constant) and isinstance(node.value, int | float):
            return node.value

        raise KeyError("Unsupported expression")

    try:
        parsed = ast.parse(str(expr).strip(), mode="eval")
    except SyntaxError as exc:
        raise ValueError(f"invalid number: {expr!r}") from exc

    return eval_node(parsed.body)


def to_si(quantity: str, value: str | float) -> float:
    """Return a configuration value converted to SI units.

    Parameters
    ----------
    quantity :  str
       kind of value, one of "power", "bandwidth", "density", "rate",
       "distance", "fraction" or "count"
    value :  str | float
       value with its unit, e.g. "23 dBm"; plain numbers are taken as SI

    Returns
    -------
    float
       the value in W, Hz, W/Hz, bit/s, m or as a dimensionless fraction

    """
    if quantity not in LINEAR_UNITS:
        raise KeyError(f"unknown quantity: {quantity}")

    if not isinstance(value, str):
        return float(eval_number(value))

    if (mtch := VALUE_PATTERN.match(value)) is None or not mtch["number"]:
        raise ValueError(f"invalid value: {value!r}")
    number = float(eval_number(mtch["number"]))
    unit = mtch["unit"] or ""

    match (quantity, unit):
        case ("power", "dBm") | ("density", "dBm/Hz"):
            return 10 ** ((number - 30) / 10)
        case ("power", "dBW") | ("density", "dBW/Hz"):
            return 10 ** (number / 10)
        case _ if unit in LINEAR_UNITS[quantity]:
            return number * LINEAR_UNITS[quantity][unit]

    raise ValueError(f"unit {unit!r} not supported for {quantity}")
