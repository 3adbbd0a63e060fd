"""Static ownership and borrowing analysis."""

from qimp.ownership.cfg import build_cfg
from qimp.ownership.checker import check_function, check_program

__all__ = ["build_cfg", "check_function", "check_program"]
