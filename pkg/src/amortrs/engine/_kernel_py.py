"""Pure-Python innermost rewriting kernel over prefix-encoded ground terms.

A term is a flat list of symbol ids in prefix order; arities come from the
symbol table.  Rule patterns use the same encoding, with variable ``k``
written as ``-1 - k``.  This module and the compiled ``_kernel`` expose the
same ``Rewriter`` class.

A node is reducible when its symbol is defined and some rule matches it.
Innermost redexes are reducible nodes without a reducible node below them;
a defined node that matches no rule is part of a normal form.
"""

NORMAL = 0
FUEL = 2


class Rewriter:
    def __init__(self, arities, defined, rules):
        self.arities = list(arities)
        self.defined = [bool(d) for d in defined]
        self.rules = {}
        for root, lhs_args, rhs, nvars in rules:
            self.rules.setdefault(root, []).append((list(lhs_args), list(rhs), nvars))

    def _end(self, t, i):
        ar = self.arities
        need = 1
        while need:
            need += ar[t[i]] - 1
            i += 1
        return i

    def _find(self, t, i, end):
        """First matching rule at node ``i`` as (rhs, spans), or None."""
        for pat, rhs, nvars in self.rules.get(t[i], ()):
            spans = [None] * nvars
            if self._match(pat, t, i, end, spans):
                return rhs, spans
        return None

    def _reducible(self, t):
        return [
            i for i, s in enumerate(t) if self.defined[s] and self._find(t, i, self._end(t, i)) is not None
        ]

    def redex(self, t, rightmost=False):
        """Position of the leftmost (or rightmost) innermost redex, or -1."""
        red = self._reducible(t)
        if not red:
            return -1
        if rightmost:
            return red[-1]
        for k, i in enumerate(red):
            nxt = red[k + 1] if k + 1 < len(red) else len(t)
            if nxt >= self._end(t, i):
                return i
        return -1  # unreachable: the last reducible node is always innermost

    def _match(self, pat, t, i, end, spans):
        j = i + 1
        for code in pat:
            if j >= end:
                return False
            if code < 0:
                e = self._end(t, j)
                spans[-1 - code] = (j, e)
                j = e
            elif t[j] != code:
                return False
            else:
                j += 1
        return j == end

    def contract(self, t, i):
        """Rewrite the redex at ``i``; returns the new term or None if no rule matches."""
        end = self._end(t, i)
        hit = self._find(t, i, end)
        if hit is None:
            return None
        rhs, spans = hit
        out = t[:i]
        for code in rhs:
            if code < 0:
                a, b = spans[-1 - code]
                out.extend(t[a:b])
            else:
                out.append(code)
        out.extend(t[end:])
        return out

    def step(self, t, rightmost=False):
        """One innermost step: (new_term, position), or (None, -1) at a normal form."""
        i = self.redex(t, rightmost)
        if i < 0:
            return None, -1
        return self.contract(t, i), i

    def normalize(self, t, fuel, rightmost=False):
        """Rewrite to normal form; returns (term, steps, status)."""
        t = list(t)
        steps = 0
        while True:
            i = self.redex(t, rightmost)
            if i < 0:
                return t, steps, NORMAL
            if steps >= fuel:
                return t, steps, FUEL
            t = self.contract(t, i)
            steps += 1
