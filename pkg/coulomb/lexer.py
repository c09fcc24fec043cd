import rply

"""
.. warning:

    Watch the order in which the tokens are added to the lexer! In case of
    ambiguity the *first matching* will win! Numbers go first so that a
    leading minus is read as a sign.
"""

lg = rply.LexerGenerator()

# Literals
lg.add('NUMBER', r'-?(\d+\.?\d*|\.\d+)([eE][-+]?\d+)?')
lg.add('NAME', r'[a-zA-Z_][a-zA-Z0-9_]*(-[a-zA-Z0-9_]+)*')

# Parenthesis
lg.add('LPAREN', r'\(')
lg.add('RPAREN', r'\)')

# Connectors
lg.add('COMMA', r',')

lg.ignore(r'\s+')
