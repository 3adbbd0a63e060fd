from qimp.frontend.lexer import Token, tokenize
from qimp.frontend.parser import parse, parse_source
from qimp.frontend.printer import print_module

__all__ = ["Token", "tokenize", "parse", "parse_source", "print_module"]
