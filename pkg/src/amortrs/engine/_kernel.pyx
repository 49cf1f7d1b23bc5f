# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled innermost rewriting kernel; same interface as ``_kernel_py``."""

from libc.stdlib cimport malloc, realloc, free
from libc.string cimport memcpy

cdef enum:
    NORMAL = 0
    FUEL = 2


cdef struct Buf:
    int *data
    Py_ssize_t n
    Py_ssize_t cap


cdef int buf_reserve(Buf *b, Py_ssize_t cap) except -1:
    cdef int *p
    if cap <= b.cap:
        return 0
    if cap < 2 * b.cap:
        cap = 2 * b.cap
    p = <int *> realloc(b.data, cap * sizeof(int))
    if p == NULL:
        raise MemoryError()
    b.data = p
    b.cap = cap
    return 0


cdef class Rewriter:
    cdef int nsym
    cdef int *arity
    cdef char *isdef
    # rules flattened: per symbol a range of rule ids
    cdef int *rule_first
    cdef int *rule_count
    cdef int nrules
    cdef int **lhs
    cdef int *lhs_len
    cdef int **rhs
    cdef int *rhs_len
    cdef int *nvars
    cdef int maxvars
    cdef Py_ssize_t *span_a
    cdef Py_ssize_t *span_b
    cdef Buf red

    def __cinit__(self, arities, defined, rules):
        cdef int i, k, r
        self.nsym = len(arities)
        self.arity = <int *> malloc(max(self.nsym, 1) * sizeof(int))
        self.isdef = <char *> malloc(max(self.nsym, 1) * sizeof(char))
        self.rule_first = <int *> malloc(max(self.nsym, 1) * sizeof(int))
        self.rule_count = <int *> malloc(max(self.nsym, 1) * sizeof(int))
        for i in range(self.nsym):
            self.arity[i] = arities[i]
            self.isdef[i] = 1 if defined[i] else 0
            self.rule_count[i] = 0
            self.rule_first[i] = 0
        ordered = sorted(enumerate(rules), key=lambda p: (p[1][0], p[0]))
        self.nrules = len(ordered)
        n = max(self.nrules, 1)
        self.lhs = <int **> malloc(n * sizeof(int *))
        self.rhs = <int **> malloc(n * sizeof(int *))
        self.lhs_len = <int *> malloc(n * sizeof(int))
        self.rhs_len = <int *> malloc(n * sizeof(int))
        self.nvars = <int *> malloc(n * sizeof(int))
        self.maxvars = 1
        for r in range(self.nrules):
            root, lhs_args, rhs, nv = ordered[r][1]
            if self.rule_count[root] == 0:
                self.rule_first[root] = r
            self.rule_count[root] += 1
            self.lhs_len[r] = len(lhs_args)
            self.rhs_len[r] = len(rhs)
            self.lhs[r] = <int *> malloc(max(len(lhs_args), 1) * sizeof(int))
            self.rhs[r] = <int *> malloc(max(len(rhs), 1) * sizeof(int))
            for k in range(len(lhs_args)):
                self.lhs[r][k] = lhs_args[k]
            for k in range(len(rhs)):
                self.rhs[r][k] = rhs[k]
            self.nvars[r] = nv
            if nv > self.maxvars:
                self.maxvars = nv
        self.span_a = <Py_ssize_t *> malloc(self.maxvars * sizeof(Py_ssize_t))
        self.span_b = <Py_ssize_t *> malloc(self.maxvars * sizeof(Py_ssize_t))
        self.red = Buf(NULL, 0, 0)

    def __dealloc__(self):
        cdef int r
        if self.lhs != NULL:
            for r in range(self.nrules):
                free(self.lhs[r])
                free(self.rhs[r])
        free(self.lhs); free(self.rhs); free(self.lhs_len); free(self.rhs_len)
        free(self.nvars); free(self.arity); free(self.isdef)
        free(self.rule_first); free(self.rule_count)
        free(self.span_a); free(self.span_b); free(self.red.data)

    cdef inline Py_ssize_t _end(self, int *t, Py_ssize_t i) nogil:
        cdef Py_ssize_t need = 1
        while need:
            need += self.arity[t[i]] - 1
            i += 1
        return i

    cdef int _find(self, int *t, Py_ssize_t i, Py_ssize_t end) nogil:
        """Index of the first rule matching node i (spans filled), or -1."""
        cdef int r, sym = t[i]
        for r in range(self.rule_first[sym], self.rule_first[sym] + self.rule_count[sym]):
            if self._match(r, t, i, end):
                return r
        return -1

    cdef Py_ssize_t _redex(self, int *t, Py_ssize_t n, bint rightmost) except -2:
        """Leftmost/rightmost innermost redex: a reducible node with no
        reducible node below it; -1 at a normal form."""
        cdef Py_ssize_t i, k, e, cnt = 0
        cdef int *pos
        buf_reserve(&self.red, n + 1)
        pos = self.red.data
        for i in range(n):
            if self.isdef[t[i]] and self._find(t, i, self._end(t, i)) >= 0:
                pos[cnt] = <int> i
                cnt += 1
        if cnt == 0:
            return -1
        if rightmost:
            return pos[cnt - 1]
        for k in range(cnt):
            i = pos[k]
            e = self._end(t, i)
            if k + 1 >= cnt or pos[k + 1] >= e:
                return i
        return -1

    cdef int _match(self, int r, int *t, Py_ssize_t i, Py_ssize_t end) nogil:
        cdef int *pat = self.lhs[r]
        cdef int k, code
        cdef Py_ssize_t j = i + 1, e
        for k in range(self.lhs_len[r]):
            if j >= end:
                return 0
            code = pat[k]
            if code < 0:
                e = self._end(t, j)
                self.span_a[-1 - code] = j
                self.span_b[-1 - code] = e
                j = e
            elif t[j] != code:
                return 0
            else:
                j += 1
        return j == end

    cdef int _contract(self, Buf *src, Py_ssize_t i, Buf *dst) except -1:
        """Returns 1 and fills dst on success, 0 when no rule applies."""
        cdef int *t = src.data
        cdef Py_ssize_t end = self._end(t, i)
        cdef int r, k, code
        cdef Py_ssize_t a, b, total
        r = self._find(t, i, end)
        if r >= 0:
            total = i + (src.n - end)
            for k in range(self.rhs_len[r]):
                code = self.rhs[r][k]
                if code < 0:
                    total += self.span_b[-1 - code] - self.span_a[-1 - code]
                else:
                    total += 1
            buf_reserve(dst, total)
            memcpy(dst.data, t, i * sizeof(int))
            dst.n = i
            for k in range(self.rhs_len[r]):
                code = self.rhs[r][k]
                if code < 0:
                    a = self.span_a[-1 - code]
                    b = self.span_b[-1 - code]
                    memcpy(dst.data + dst.n, t + a, (b - a) * sizeof(int))
                    dst.n += b - a
                else:
                    dst.data[dst.n] = code
                    dst.n += 1
            memcpy(dst.data + dst.n, t + end, (src.n - end) * sizeof(int))
            dst.n += src.n - end
            return 1
        return 0

    cdef _load(self, t, Buf *b):
        cdef Py_ssize_t k, n = len(t)
        buf_reserve(b, max(n, 16))
        for k in range(n):
            b.data[k] = t[k]
        b.n = n

    cdef list _dump(self, Buf *b):
        return [b.data[k] for k in range(b.n)]

    def redex(self, t, rightmost=False):
        cdef Buf b = Buf(NULL, 0, 0)
        try:
            self._load(t, &b)
            return self._redex(b.data, b.n, rightmost)
        finally:
            free(b.data)

    def contract(self, t, Py_ssize_t i):
        cdef Buf a = Buf(NULL, 0, 0)
        cdef Buf b = Buf(NULL, 0, 0)
        try:
            self._load(t, &a)
            if self._contract(&a, i, &b):
                return self._dump(&b)
            return None
        finally:
            free(a.data)
            free(b.data)

    def step(self, t, rightmost=False):
        cdef Buf a = Buf(NULL, 0, 0)
        cdef Buf b = Buf(NULL, 0, 0)
        cdef Py_ssize_t i
        try:
            self._load(t, &a)
            i = self._redex(a.data, a.n, rightmost)
            if i < 0:
                return None, -1
            if self._contract(&a, i, &b):
                return self._dump(&b), i
            return None, i
        finally:
            free(a.data)
            free(b.data)

    def normalize(self, t, long fuel, rightmost=False):
        cdef Buf a = Buf(NULL, 0, 0)
        cdef Buf b = Buf(NULL, 0, 0)
        cdef Buf tmp
        cdef long steps = 0
        cdef Py_ssize_t i
        cdef int status = NORMAL
        cdef bint rm = rightmost
        try:
            self._load(t, &a)
            buf_reserve(&b, a.cap)
            while True:
                i = self._redex(a.data, a.n, rm)
                if i < 0:
                    status = NORMAL
                    break
                if steps >= fuel:
                    status = FUEL
                    break
                self._contract(&a, i, &b)
                tmp = a
                a = b
                b = tmp
                steps += 1
            return self._dump(&a), steps, status
        finally:
            free(a.data)
            free(b.data)
