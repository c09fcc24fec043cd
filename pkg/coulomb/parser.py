from collections import namedtuple

import rply

from .errors import SweepSyntaxError
from .lexer import lg


pg = rply.ParserGenerator([rule.name for rule in lg.rules])

"""

value   :   item_list

item_list   :   item
            |   item_list COMMA item

item    :   number
        |   name
        |   call

call    :   NAME LPAREN item_list RPAREN

number  :   NUMBER

name    :   NAME

"""

# A constructor such as ``linear(1, 10, 5)``; resolved by the sweep layer.
Call = namedtuple('Call', ['name', 'args'])


@pg.production('value : item_list')
def value_item_list(p):
    items = p[0]
    if len(items) == 1:
        return items[0]
    return items


@pg.production('item_list : item')
def item_list_item(p):
    return [p[0]]


@pg.production('item_list : item_list COMMA item')
def item_list_append(p):
    item_list, _, item = p
    item_list.append(item)
    return item_list


@pg.production('item : number')
@pg.production('item : name')
@pg.production('item : call')
def item(p):
    return p[0]


@pg.production('call : NAME LPAREN item_list RPAREN')
def call_NAME(p):
    name, _, args, _ = p
    return Call(name.getstr(), tuple(args))


@pg.production('number : NUMBER')
def number_NUMBER(p):
    number = p[0].getstr()
    if '.' in number or 'e' in number or 'E' in number:
        cast = float
    else:
        cast = int
    return cast(number)


@pg.production('name : NAME')
def name_NAME(p):
    return p[0].getstr()


@pg.error
def error(token):
    pos = token.getsourcepos()
    if token.gettokentype() == '$end':
        raise SweepSyntaxError('Unexpected end of value')
    raise SweepSyntaxError('Unexpected token: %r' % token.getstr(),
                           col=pos.colno - 1 if pos is not None else None)


lexer = lg.build()
parser = pg.build()


def parse_value(text, line=None):
    """
    Parse a flag or configuration value.

    :param str text: e.g. ``'ld, gaussian'``, ``'-10'`` or ``'db(0, 60, 13)'``.
    :param int line: Zero-based line the value came from, for diagnostics.
    :returns: A number, a name, a :class:`Call`, or a list of those.
    :raises SweepSyntaxError: on malformed input.
    """
    if not text or not text.strip():
        raise SweepSyntaxError('Empty value', line=line)
    try:
        return parser.parse(lexer.lex(text))
    except rply.LexingError as e:
        pos = e.getsourcepos()
        raise SweepSyntaxError(
            'Unexpected character in %r' % text, line=line,
            col=pos.idx if pos is not None else None)
    except SweepSyntaxError as e:
        if line is None:
            raise
        raise SweepSyntaxError(str(e), line=line, col=e.col)
