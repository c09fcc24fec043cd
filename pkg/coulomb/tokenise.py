import re

from .errors import SweepSyntaxError


class Token(object):
    """
    One ``key = value`` statement of a configuration file.
    """
    __slots__ = ('key', 'content', 'line', 'col',)

    def __init__(self, key, content, line=None, col=None):
        self.key = key
        self.content = content
        self.line = line
        self.col = col

    def __repr__(self):
        return u'{%s} %s' % (self.key, self.content,)


statement_re = re.compile(r'^(?P<indent>\s*)(?P<key>[a-z][a-z0-9-]*)\s*=\s*'
                          r'(?P<value>.*?)\s*$')


def tokenise(source):
    """
    A generator which yields a Token per statement; blank lines and ``#``
    comments are skipped.
    """
    for lineno, raw in enumerate(source.splitlines()):
        text, _, _ = raw.partition('#')
        if not text.strip():
            continue
        m = statement_re.match(text)
        if m is None:
            raise SweepSyntaxError('expected "key = value"', line=lineno, col=0)
        yield Token(m.group('key'), m.group('value'), line=lineno,
                    col=m.start('value'))
