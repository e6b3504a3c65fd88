"""Typed SSA frontend IR ("FIR"): the source language of the translator.

A FIR function is a sequence of 1-based numbered basic blocks holding
invoke/phi/goto/gotoifnot/return statements over SSA ids (``%n``),
parameters (``_k``), and literals. ``goto #k ifnot c`` falls through to
the lexically next block when the condition holds.

This module provides the text parser, a validation pass, forced call
inlining, and the bool-conversion insertion pass that runs before
translation.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

__all__ = [
    "FrontendType",
    "Concrete",
    "Abstract",
    "AnyFrontend",
    "ANY",
    "F32",
    "F64",
    "I64",
    "I1",
    "INDEX",
    "BOOL",
    "NOTHING",
    "ABSTRACT_FLOAT",
    "INTEGER",
    "tensor_of",
    "memref_of",
    "complex_of",
    "subtype",
    "parse_frontend_type",
    "FirArg",
    "SsaRef",
    "ParamRef",
    "IntLit",
    "FloatLit",
    "BoolLit",
    "Invoke",
    "Phi",
    "Goto",
    "GotoIfNot",
    "Return",
    "Nothing",
    "FirFunction",
    "FirProgram",
    "FirError",
    "BOOL_CONVERSION",
    "parse_program",
    "print_fir",
    "validate_fir",
    "arg_type",
    "block_edges",
    "predecessors",
    "reachable_blocks",
    "inline_calls",
    "insert_bool_conversions",
    "normalize",
]


class FirError(Exception):
    """Parse or transform failure in frontend IR."""


BOOL_CONVERSION = "bool_conversion_intrinsic"


# ---------------------------------------------------------------------------
# Frontend types


class FrontendType:
    def __str__(self) -> str:
        return frontend_type_text(self)


@dataclass(frozen=True)
class Concrete(FrontendType):
    name: str
    params: tuple = ()


@dataclass(frozen=True)
class Abstract(FrontendType):
    name: str


@dataclass(frozen=True)
class AnyFrontend(FrontendType):
    pass


ANY = AnyFrontend()
F32 = Concrete("f32")
F64 = Concrete("f64")
I64 = Concrete("i64")
I1 = Concrete("i1")
INDEX = Concrete("index")
BOOL = Concrete("Bool")
NOTHING = Concrete("Nothing")
ABSTRACT_FLOAT = Abstract("AbstractFloat")
INTEGER = Abstract("Integer")


def tensor_of(elem: FrontendType, rank: int) -> Concrete:
    return Concrete("tensor", (elem, rank))


def memref_of(elem: FrontendType, rank: int) -> Concrete:
    return Concrete("memref", (elem, rank))


def complex_of(elem: FrontendType) -> Concrete:
    return Concrete("Complex", (elem,))


# Abstract parent of each concrete type; anything absent sits under Any.
_PARENT = {
    "f32": ABSTRACT_FLOAT,
    "f64": ABSTRACT_FLOAT,
    "i64": INTEGER,
    "i1": INTEGER,
    "index": INTEGER,
    "Bool": INTEGER,
}


def supertype(t: FrontendType):
    """Immediate parent in the lattice, or None for Any itself."""
    if isinstance(t, AnyFrontend):
        return None
    if isinstance(t, Concrete):
        return _PARENT.get(t.name, ANY)
    return ANY


def subtype(a: FrontendType, b: FrontendType) -> bool:
    """Partial order with Any on top; concrete types are minimal."""
    while True:
        if a == b:
            return True
        a = supertype(a)
        if a is None:
            return False


def frontend_type_text(t: FrontendType) -> str:
    if isinstance(t, AnyFrontend):
        return "Any"
    if isinstance(t, Abstract):
        return t.name
    if t.name in ("tensor", "memref"):
        elem, rank = t.params
        return f"{t.name}{{{frontend_type_text(elem)},{rank}}}"
    if t.name == "Complex":
        return f"Complex{{{frontend_type_text(t.params[0])}}}"
    return t.name


_SCALARS = {
    "f32": F32, "f64": F64, "i64": I64, "i1": I1, "index": INDEX,
    "Bool": BOOL, "Nothing": NOTHING,
}


def parse_frontend_type(text: str) -> FrontendType:
    text = text.strip()
    if text in _SCALARS:
        return _SCALARS[text]
    m = re.fullmatch(r"(tensor|memref)\{(.+),\s*(\d+)\}", text)
    if m:
        return Concrete(m.group(1), (parse_frontend_type(m.group(2)), int(m.group(3))))
    m = re.fullmatch(r"Complex\{(.+)\}", text)
    if m:
        return complex_of(parse_frontend_type(m.group(1)))
    raise FirError(f"unknown frontend type '{text}'")


# ---------------------------------------------------------------------------
# Statements


class FirArg:
    pass


@dataclass(frozen=True)
class SsaRef(FirArg):
    id: int

    def __str__(self):
        return f"%{self.id}"


@dataclass(frozen=True)
class ParamRef(FirArg):
    index: int  # 1-based

    def __str__(self):
        return f"_{self.index}"


@dataclass(frozen=True)
class IntLit(FirArg):
    value: int

    def __str__(self):
        return str(self.value)


@dataclass(frozen=True)
class FloatLit(FirArg):
    value: float

    def __str__(self):
        return repr(self.value)


@dataclass(frozen=True)
class BoolLit(FirArg):
    value: bool

    def __str__(self):
        return "true" if self.value else "false"


@dataclass
class Invoke:
    id: int
    target: str
    args: list
    result_type: FrontendType


@dataclass
class Phi:
    id: int
    incomings: list  # (pred block number, FirArg)
    result_type: FrontendType


@dataclass
class Goto:
    target: int


@dataclass
class GotoIfNot:
    cond: FirArg
    target: int


@dataclass
class Return:
    value: object  # FirArg or None


@dataclass
class Nothing:
    pass


TERMINATORS = (Goto, GotoIfNot, Return)


@dataclass
class FirFunction:
    name: str
    param_types: list
    blocks: list  # list of statement lists; index 0 is block #1

    def n_blocks(self) -> int:
        return len(self.blocks)

    def statements(self):
        for bi, block in enumerate(self.blocks, start=1):
            for st in block:
                yield bi, st


@dataclass
class FirProgram:
    functions: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# Parsing

_FN_RE = re.compile(r"fn\s+(\S+)\s*\((.*)\)\s*$")
_BLOCK_RE = re.compile(r"(\d+):\s*$")
_INVOKE_RE = re.compile(r"%(\d+)\s*=\s*invoke\s+([^\s(]+)\((.*)\)\s*::\s*(\S+)\s*$")
_PHI_RE = re.compile(r"%(\d+)\s*=\s*phi\s*\((.*)\)\s*::\s*(\S+)\s*$")
_INCOMING_RE = re.compile(r"#(\d+)\s*=>\s*(\S+)")
_GOTO_IFNOT_RE = re.compile(r"goto\s+#(\d+)\s+ifnot\s+(\S+)\s*$")
_GOTO_RE = re.compile(r"goto\s+#(\d+)\s*$")
_RETURN_RE = re.compile(r"return(?:\s+(\S+))?\s*$")


def _parse_arg(text: str, line: int) -> FirArg:
    text = text.strip()
    if text.startswith("%"):
        return SsaRef(int(text[1:]))
    if text.startswith("_"):
        return ParamRef(int(text[1:]))
    if text == "true":
        return BoolLit(True)
    if text == "false":
        return BoolLit(False)
    if re.fullmatch(r"-?\d+", text):
        return IntLit(int(text))
    if re.fullmatch(
            r"-?\d*\.\d+(e[+-]?\d+)?|-?\d+\.\d*(e[+-]?\d+)?|-?\d+e[+-]?\d+",
            text):
        return FloatLit(float(text))
    raise FirError(f"line {line}: cannot parse argument '{text}'")


def _split_args(text: str) -> list:
    # splits on top-level commas; args contain no nesting
    text = text.strip()
    if not text:
        return []
    return [p for p in (s.strip() for s in text.split(",")) if p]


def split_commas(text: str) -> list:
    """Split on commas outside braces (for type lists like memref{f32,1})."""
    out, depth, cur = [], 0, []
    for ch in text:
        if ch == "{":
            depth += 1
        elif ch == "}":
            depth -= 1
        if ch == "," and depth == 0:
            out.append("".join(cur).strip())
            cur = []
        else:
            cur.append(ch)
    tail = "".join(cur).strip()
    if tail or out:
        out.append(tail)
    return out


def parse_program(text: str) -> FirProgram:
    """Parse FIR text, resolving all SSA and block references.

    Forward block references are allowed; the resulting functions are
    checked for undefined SSA ids, parameters, and block numbers.
    """
    program = FirProgram()
    fn = None
    block = None

    def close():
        nonlocal fn, block
        if fn is None:
            return
        if not fn.blocks:
            raise FirError(f"function '{fn.name}' has no blocks")
        _resolve_check(fn)
        if fn.name in program.functions:
            raise FirError(f"duplicate function '{fn.name}'")
        program.functions[fn.name] = fn
        fn = None
        block = None

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        m = _FN_RE.match(line)
        if m:
            close()
            params = []
            params_text = m.group(2).strip()
            if params_text:
                for i, part in enumerate(split_commas(params_text), start=1):
                    pm = re.fullmatch(r"\s*_(\d+)\s*:\s*(\S+)\s*", part)
                    if not pm or int(pm.group(1)) != i:
                        raise FirError(
                            f"line {lineno}: expected parameter '_{i}: <type>'")
                    params.append(parse_frontend_type(pm.group(2)))
            fn = FirFunction(m.group(1), params, [])
            continue
        if fn is None:
            raise FirError(f"line {lineno}: statement outside a function")
        m = _BLOCK_RE.match(line)
        if m:
            number = int(m.group(1))
            if number != len(fn.blocks) + 1:
                raise FirError(
                    f"line {lineno}: expected block {len(fn.blocks) + 1}, "
                    f"got {number}")
            block = []
            fn.blocks.append(block)
            continue
        if block is None:
            raise FirError(f"line {lineno}: statement before first block header")
        m = _INVOKE_RE.match(line)
        if m:
            args = [_parse_arg(a, lineno) for a in _split_args(m.group(3))]
            block.append(Invoke(int(m.group(1)), m.group(2), args,
                                parse_frontend_type(m.group(4))))
            continue
        m = _PHI_RE.match(line)
        if m:
            incomings = []
            body = m.group(2).strip()
            if body:
                for part in body.split(","):
                    im = _INCOMING_RE.fullmatch(part.strip())
                    if not im:
                        raise FirError(
                            f"line {lineno}: bad phi incoming '{part.strip()}'")
                    incomings.append((int(im.group(1)),
                                      _parse_arg(im.group(2), lineno)))
            block.append(Phi(int(m.group(1)), incomings,
                             parse_frontend_type(m.group(3))))
            continue
        m = _GOTO_IFNOT_RE.match(line)
        if m:
            block.append(GotoIfNot(_parse_arg(m.group(2), lineno),
                                   int(m.group(1))))
            continue
        m = _GOTO_RE.match(line)
        if m:
            block.append(Goto(int(m.group(1))))
            continue
        m = _RETURN_RE.match(line)
        if m:
            value = _parse_arg(m.group(1), lineno) if m.group(1) else None
            block.append(Return(value))
            continue
        if line == "nothing":
            block.append(Nothing())
            continue
        raise FirError(f"line {lineno}: cannot parse statement '{line}'")
    close()
    return program


def _resolve_check(fn: FirFunction):
    """Undefined-reference checks run at parse time (order-insensitive)."""
    defined = set()
    for _, st in fn.statements():
        if isinstance(st, (Invoke, Phi)):
            if st.id in defined:
                raise FirError(f"{fn.name}: duplicate SSA id %{st.id}")
            defined.add(st.id)
    n = fn.n_blocks()

    def check_arg(a: FirArg):
        if isinstance(a, SsaRef) and a.id not in defined:
            raise FirError(f"{fn.name}: reference to undefined SSA id %{a.id}")
        if isinstance(a, ParamRef) and not 1 <= a.index <= len(fn.param_types):
            raise FirError(f"{fn.name}: reference to undefined parameter _{a.index}")

    for _, st in fn.statements():
        if isinstance(st, Invoke):
            for a in st.args:
                check_arg(a)
        elif isinstance(st, Phi):
            for pred, a in st.incomings:
                if not 1 <= pred <= n:
                    raise FirError(f"{fn.name}: phi references undefined block #{pred}")
                check_arg(a)
        elif isinstance(st, GotoIfNot):
            check_arg(st.cond)
            if not 1 <= st.target <= n:
                raise FirError(f"{fn.name}: goto to undefined block #{st.target}")
        elif isinstance(st, Goto):
            if not 1 <= st.target <= n:
                raise FirError(f"{fn.name}: goto to undefined block #{st.target}")
        elif isinstance(st, Return) and st.value is not None:
            check_arg(st.value)


# ---------------------------------------------------------------------------
# Printing (debug serializer; parse_program round-trips it)


def _stmt_text(st) -> str:
    if isinstance(st, Invoke):
        args = ", ".join(str(a) for a in st.args)
        return f"%{st.id} = invoke {st.target}({args}) :: {st.result_type}"
    if isinstance(st, Phi):
        inc = ", ".join(f"#{p} => {a}" for p, a in st.incomings)
        return f"%{st.id} = phi ({inc}) :: {st.result_type}"
    if isinstance(st, Goto):
        return f"goto #{st.target}"
    if isinstance(st, GotoIfNot):
        return f"goto #{st.target} ifnot {st.cond}"
    if isinstance(st, Return):
        return "return" if st.value is None else f"return {st.value}"
    if isinstance(st, Nothing):
        return "nothing"
    raise FirError(f"cannot print statement {st!r}")


def print_fir(fn: FirFunction) -> str:
    params = ", ".join(f"_{i}: {t}" for i, t in enumerate(fn.param_types, start=1))
    out = [f"fn {fn.name}({params})"]
    for bi, block in enumerate(fn.blocks, start=1):
        out.append(f"{bi}:")
        for st in block:
            out.append(f"  {_stmt_text(st)}")
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# Queries


def block_edges(fn: FirFunction):
    """CFG edges (from, to) over 1-based block numbers, fallthrough included."""
    edges = set()
    n = fn.n_blocks()
    for bi, block in enumerate(fn.blocks, start=1):
        last = block[-1] if block else None
        if isinstance(last, Goto):
            edges.add((bi, last.target))
        elif isinstance(last, GotoIfNot):
            edges.add((bi, last.target))
            if bi < n:
                edges.add((bi, bi + 1))
        elif isinstance(last, Return):
            pass
        elif bi < n:
            edges.add((bi, bi + 1))
    return edges


def predecessors(fn: FirFunction):
    preds = {b: [] for b in range(1, fn.n_blocks() + 1)}
    for src, dst in sorted(block_edges(fn)):
        preds[dst].append(src)
    return preds


def reachable_blocks(fn: FirFunction):
    edges = block_edges(fn)
    succ = {}
    for a, b in edges:
        succ.setdefault(a, set()).add(b)
    seen = {1}
    work = [1]
    while work:
        b = work.pop()
        for s in succ.get(b, ()):
            if s not in seen:
                seen.add(s)
                work.append(s)
    return seen


def _result_types(fn: FirFunction):
    types = {}
    for _, st in fn.statements():
        if isinstance(st, (Invoke, Phi)):
            types[st.id] = st.result_type
    return types


def arg_type(fn: FirFunction, arg: FirArg, *, _types=None) -> FrontendType:
    """Frontend type of an argument; literals get their natural type."""
    if isinstance(arg, SsaRef):
        types = _types if _types is not None else _result_types(fn)
        return types[arg.id]
    if isinstance(arg, ParamRef):
        return fn.param_types[arg.index - 1]
    if isinstance(arg, IntLit):
        return I64
    if isinstance(arg, FloatLit):
        return F64
    if isinstance(arg, BoolLit):
        return BOOL
    raise FirError(f"no type for argument {arg!r}")


# ---------------------------------------------------------------------------
# Validation


def validate_fir(fn: FirFunction):
    """Check the structural invariants; returns all violations as strings."""
    violations = []
    n = fn.n_blocks()
    preds = predecessors(fn)

    for bi, block in enumerate(fn.blocks, start=1):
        for st in block[:-1]:
            if isinstance(st, TERMINATORS):
                violations.append(
                    f"block {bi}: terminator before the end of the block")
        last = block[-1] if block else None
        if bi == n and not isinstance(last, (Goto, Return)):
            violations.append(
                f"block {bi}: last block falls off the end of the function")
        head = True
        for st in block:
            if isinstance(st, Phi):
                if not head:
                    violations.append(
                        f"block {bi}: phi %{st.id} not at the start of the block")
                covered = {p for p, _ in st.incomings}
                for p in covered:
                    if p not in preds[bi]:
                        violations.append(
                            f"block {bi}: phi %{st.id} references non-predecessor #{p}")
            else:
                head = False

    # SSA references must point at earlier statements (global order) or params.
    seen = set()
    order = []
    for bi, st in fn.statements():
        order.append((bi, st))
    for bi, st in order:
        args = []
        if isinstance(st, Invoke):
            args = st.args
        elif isinstance(st, GotoIfNot):
            args = [st.cond]
        elif isinstance(st, Return) and st.value is not None:
            args = [st.value]
        # phi incomings may reference later statements (loop-carried values)
        for a in args:
            if isinstance(a, SsaRef) and a.id not in seen:
                violations.append(
                    f"block {bi}: %{a.id} used before its definition")
        if isinstance(st, (Invoke, Phi)):
            seen.add(st.id)
    return violations


# ---------------------------------------------------------------------------
# Inlining


def _call_targets(fn: FirFunction, program: FirProgram, is_intrinsic):
    out = set()
    for _, st in fn.statements():
        if isinstance(st, Invoke) and st.target != BOOL_CONVERSION:
            types = tuple(arg_type(fn, a) for a in st.args)
            if is_intrinsic(st.target, types):
                continue
            if st.target not in program.functions:
                raise FirError(
                    f"{fn.name}: call target '{st.target}' is neither an "
                    f"intrinsic nor defined in the program")
            out.add(st.target)
    return out


def _copy_fn(fn: FirFunction) -> FirFunction:
    blocks = []
    for block in fn.blocks:
        new = []
        for st in block:
            if isinstance(st, Invoke):
                new.append(Invoke(st.id, st.target, list(st.args), st.result_type))
            elif isinstance(st, Phi):
                new.append(Phi(st.id, list(st.incomings), st.result_type))
            elif isinstance(st, Goto):
                new.append(Goto(st.target))
            elif isinstance(st, GotoIfNot):
                new.append(GotoIfNot(st.cond, st.target))
            elif isinstance(st, Return):
                new.append(Return(st.value))
            else:
                new.append(Nothing())
        blocks.append(new)
    return FirFunction(fn.name, list(fn.param_types), blocks)


def _max_id(fn: FirFunction) -> int:
    ids = [st.id for _, st in fn.statements() if isinstance(st, (Invoke, Phi))]
    return max(ids, default=0)


def _substitute(fn: FirFunction, mapping):
    """Replace SSA references by other arguments, in place."""

    def sub(a):
        if isinstance(a, SsaRef) and a.id in mapping:
            return mapping[a.id]
        return a

    for _, st in fn.statements():
        if isinstance(st, Invoke):
            st.args = [sub(a) for a in st.args]
        elif isinstance(st, Phi):
            st.incomings = [(p, sub(a)) for p, a in st.incomings]
        elif isinstance(st, GotoIfNot):
            st.cond = sub(st.cond)
        elif isinstance(st, Return) and st.value is not None:
            st.value = sub(st.value)


def _renumber_blocks(fn: FirFunction, mapping):
    for _, st in fn.statements():
        if isinstance(st, Goto):
            st.target = mapping[st.target]
        elif isinstance(st, GotoIfNot):
            st.target = mapping[st.target]
        elif isinstance(st, Phi):
            st.incomings = [(mapping[p], a) for p, a in st.incomings]


def _splice_one(caller: FirFunction, callee: FirFunction) -> bool:
    """Inline the first call to ``callee`` in ``caller``; True if one was found.

    The callee must already be fully inlined (intrinsic calls only).
    """
    site = None
    for bi, block in enumerate(caller.blocks, start=1):
        for si, st in enumerate(block):
            if isinstance(st, Invoke) and st.target == callee.name:
                site = (bi, si, st)
                break
        if site:
            break
    if site is None:
        return False
    call_block, call_pos, call = site

    fresh = _max_id(caller) + 1
    body = _copy_fn(callee)

    # Keep only callee blocks reachable from its entry; phi incomings from
    # dropped blocks go with them.
    keep = sorted(reachable_blocks(body))
    body.blocks = [body.blocks[b - 1] for b in keep]
    for block in body.blocks:
        for st in block:
            if isinstance(st, Phi):
                st.incomings = [(p, a) for p, a in st.incomings if p in keep]
    _renumber_blocks(body, {old: new for new, old in enumerate(keep, start=1)})

    # Fresh SSA ids for every callee statement.
    id_map = {}
    for _, st in body.statements():
        if isinstance(st, (Invoke, Phi)):
            id_map[st.id] = fresh
            fresh += 1
    _substitute(body, {old: SsaRef(new) for old, new in id_map.items()})
    for _, st in body.statements():
        if isinstance(st, (Invoke, Phi)):
            st.id = id_map[st.id]

    # Bind callee parameters to the call arguments.
    for _, st in body.statements():
        if isinstance(st, Invoke):
            st.args = [call.args[a.index - 1] if isinstance(a, ParamRef) else a
                       for a in st.args]
        elif isinstance(st, Phi):
            st.incomings = [
                (p, call.args[a.index - 1] if isinstance(a, ParamRef) else a)
                for p, a in st.incomings]
        elif isinstance(st, GotoIfNot) and isinstance(st.cond, ParamRef):
            st.cond = call.args[st.cond.index - 1]
        elif isinstance(st, Return) and isinstance(st.value, ParamRef):
            st.value = call.args[st.value.index - 1]

    # New layout keeps definitions lexically before uses and every implicit
    # fallthrough adjacent:
    #   ... | head (call_block) | callee blocks | continuation | shifted rest
    n_caller = caller.n_blocks()
    k = body.n_blocks()
    head = caller.blocks[call_block - 1][:call_pos]
    tail = caller.blocks[call_block - 1][call_pos + 1:]
    callee_base = call_block + 1
    cont_number = call_block + k + 1

    old_to_new = {b: (b if b <= call_block else b + k + 1)
                  for b in range(1, n_caller + 1)}
    _renumber_blocks(caller, old_to_new)
    # Every edge that used to leave call_block now leaves the continuation
    # (the original terminator moved there with the tail).
    for block in caller.blocks:
        for st in block:
            if isinstance(st, Phi):
                st.incomings = [(cont_number if p == call_block else p, a)
                                for p, a in st.incomings]

    _renumber_blocks(body, {b: call_block + b for b in range(1, k + 1)})

    # Returns in the callee jump to the continuation block.
    returns = []
    for bi, block in enumerate(body.blocks, start=callee_base):
        last = block[-1]
        if isinstance(last, Return):
            returns.append((bi, last.value))
            block[-1] = Goto(cont_number)
    if not returns:
        raise FirError(f"cannot inline '{callee.name}': no reachable return")

    cont = []
    if len(returns) == 1:
        result_map = {call.id: returns[0][1]}
    else:
        cont.append(Phi(call.id, [(bi, v) for bi, v in returns], call.result_type))
        result_map = None
    cont.extend(tail)

    head.append(Goto(callee_base))
    caller.blocks = (caller.blocks[:call_block - 1]
                     + [head]
                     + body.blocks
                     + [cont]
                     + caller.blocks[call_block:])
    if result_map is not None:
        _substitute(caller, result_map)
    return True


def inline_calls(program: FirProgram, entry: str, is_intrinsic) -> FirFunction:
    """Fully inline every program-defined call in ``entry``.

    ``is_intrinsic(name, arg_types)`` marks calls that must be left alone.
    Recursion (direct or mutual) is reported as a call-graph cycle.
    """
    if entry not in program.functions:
        raise FirError(f"no function named '{entry}'")

    graph = {}

    def targets(name):
        if name not in graph:
            graph[name] = _call_targets(program.functions[name], program,
                                        is_intrinsic)
        return graph[name]

    # Cycle check restricted to functions reachable from the entry.
    state = {}
    stack = []

    def visit(name):
        state[name] = "active"
        stack.append(name)
        for t in sorted(targets(name)):
            if state.get(t) == "active":
                cycle = stack[stack.index(t):] + [t]
                raise FirError("recursive call cycle: " + " -> ".join(cycle))
            if t not in state:
                visit(t)
        stack.pop()
        state[name] = "done"

    visit(entry)

    inlined = {}

    def flatten(name):
        if name in inlined:
            return inlined[name]
        fn = _copy_fn(program.functions[name])
        for target in sorted(targets(name)):
            callee = flatten(target)
            while _splice_one(fn, callee):
                pass
        inlined[name] = fn
        return fn

    return flatten(entry)


# ---------------------------------------------------------------------------
# Bool conversion insertion


def insert_bool_conversions(fn: FirFunction, is_frontend_bool=None) -> FirFunction:
    """Route every non-Bool branch condition through the conversion intrinsic.

    Returns a transformed copy; blocks and every other statement are
    untouched.
    """
    if is_frontend_bool is None:
        is_frontend_bool = lambda t: t == BOOL
    out = _copy_fn(fn)
    types = _result_types(out)
    fresh = _max_id(out) + 1
    for block in out.blocks:
        i = 0
        while i < len(block):
            st = block[i]
            if isinstance(st, GotoIfNot):
                t = arg_type(out, st.cond, _types=types)
                if not is_frontend_bool(t):
                    conv = Invoke(fresh, BOOL_CONVERSION, [st.cond], BOOL)
                    fresh += 1
                    block.insert(i, conv)
                    st.cond = SsaRef(conv.id)
                    i += 1
            i += 1
    return out


# ---------------------------------------------------------------------------
# Normalization (canonical renumbering for structural comparison)


def normalize(fn: FirFunction) -> FirFunction:
    """Renumber SSA ids densely in statement order (blocks stay fixed)."""
    out = _copy_fn(fn)
    mapping = {}
    nxt = 1
    for _, st in out.statements():
        if isinstance(st, (Invoke, Phi)):
            mapping[st.id] = nxt
            nxt += 1
    _substitute(out, {old: SsaRef(new) for old, new in mapping.items()})
    for _, st in out.statements():
        if isinstance(st, (Invoke, Phi)):
            st.id = mapping[st.id]
    return out
