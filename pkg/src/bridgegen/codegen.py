"""Translation engine: frontend SSA statements to dialect operations.

Intrinsic functions are the bridge: each is a builder callback registered
under a (name, parameter types) signature, selected by multiple dispatch
over all argument types. The engine walks a validated, fully inlined
frontend function statement by statement, mirrors its CFG one block per
source block, and turns phi nodes into block arguments whose values are
passed by the predecessor branches.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import dialects as dl
from . import fir
from . import ir

__all__ = [
    "CodegenError",
    "NoMethodError",
    "AmbiguousMethodError",
    "IntrinsicSignature",
    "IntrinsicRegistry",
    "BuilderContext",
    "register_intrinsic",
    "resolve_method",
    "map_type",
    "materialize_constant",
    "generate",
    "generate_region",
]


class CodegenError(Exception):
    pass


class NoMethodError(CodegenError):
    pass


class AmbiguousMethodError(CodegenError):
    pass


@dataclass(frozen=True)
class IntrinsicSignature:
    name: str
    param_types: tuple

    def __str__(self):
        params = ", ".join(str(t) for t in self.param_types)
        return f"{self.name}({params})"


def _pointwise_le(a: IntrinsicSignature, b: IntrinsicSignature) -> bool:
    return all(fir.subtype(x, y) for x, y in zip(a.param_types, b.param_types))


class IntrinsicRegistry:
    """Dispatch table from intrinsic signatures to operation builders.

    Also owns the frontend-to-IR type mapping, the control-flow hooks
    invoked for goto/gotoifnot/return statements, and per-type bool
    conversion builders. Built once during setup; read-only afterwards.
    """

    def __init__(self, dialect_registry=None):
        self.dialects = dialect_registry or dl.builtin_registry()
        self.methods = {}  # name -> list[(IntrinsicSignature, builder)]
        self.scalar_types = {
            fir.F32: ir.F32,
            fir.F64: ir.F64,
            fir.I64: ir.I64,
            fir.I1: ir.I1,
            fir.INDEX: ir.INDEX,
            fir.BOOL: ir.I1,
        }
        self.bool_conversions = {}  # condition FrontendType -> builder
        self.generate_goto = _default_goto
        self.generate_gotoifnot = _default_gotoifnot
        self.generate_return = _default_return

    def has_name(self, name: str) -> bool:
        return name in self.methods

    def signatures(self, name: str):
        return [sig for sig, _ in self.methods.get(name, [])]


def register_intrinsic(registry: IntrinsicRegistry, signature: IntrinsicSignature,
                       builder) -> IntrinsicRegistry:
    """Make ``builder`` resolvable under ``signature``.

    The builder receives ``(ctx, args)`` where ``args`` holds one value
    sequence per frontend argument (structured types arrive unpacked), and
    returns the result value sequence.
    """
    entries = registry.methods.setdefault(signature.name, [])
    for sig, _ in entries:
        if sig == signature:
            raise CodegenError(f"duplicate intrinsic signature {signature}")
    entries.append((signature, builder))
    return registry


def resolve_method(registry: IntrinsicRegistry, name: str, arg_types):
    """Most specific applicable builder for ``name`` over ``arg_types``.

    Applicability is pointwise subtyping; specificity is the pointwise
    order. A unique minimum must exist, otherwise the call is ambiguous.
    """
    arg_types = tuple(arg_types)
    probe = IntrinsicSignature(name, arg_types)
    applicable = [
        (sig, builder)
        for sig, builder in registry.methods.get(name, [])
        if len(sig.param_types) == len(arg_types) and _pointwise_le(probe, sig)
    ]
    if not applicable:
        raise NoMethodError(f"no method matching {probe}")
    best = applicable[0]
    for cand in applicable[1:]:
        if _pointwise_le(cand[0], best[0]):
            best = cand
    for cand in applicable:
        if not _pointwise_le(best[0], cand[0]):
            tied = ", ".join(str(s) for s, _ in applicable
                             if not _pointwise_le(best[0], s) or s == best[0])
            raise AmbiguousMethodError(
                f"ambiguous call {probe}; candidates: {tied}")
    return best


def map_type(registry: IntrinsicRegistry, frontend_type) -> list:
    """Flatten a concrete frontend type into its IR type sequence.

    Scalars map through the registry table; tensors/memrefs become ranked
    types with dynamic extents; structured types (Complex) concatenate
    their components in field order; Nothing is empty.
    """
    t = frontend_type
    if not isinstance(t, fir.Concrete):
        raise CodegenError(f"cannot map non-concrete type {t}")
    if t in registry.scalar_types:
        return [registry.scalar_types[t]]
    if t.name == "Nothing":
        return []
    if t.name in ("tensor", "memref"):
        elem, rank = t.params
        elems = map_type(registry, elem)
        if len(elems) != 1:
            raise CodegenError(f"{t}: element type must map to one IR type")
        cls = ir.TensorType if t.name == "tensor" else ir.MemRefType
        return [cls(elems[0], (ir.DYN,) * rank)]
    if t.name == "Complex":
        inner = map_type(registry, t.params[0])
        return inner + inner
    raise CodegenError(f"no IR mapping for frontend type {t}")


# ---------------------------------------------------------------------------
# Builder context


@dataclass
class BuilderContext:
    """Per-translation bookkeeping; never shared across threads."""

    module: ir.IrModule
    registry: IntrinsicRegistry
    region: ir.IrRegion
    entry_block: ir.IrBlock
    block: ir.IrBlock = None
    block_map: dict = field(default_factory=dict)   # FIR block number -> IrBlock
    values: dict = field(default_factory=dict)      # FIR SSA id / param -> [IrValue]
    constants: dict = field(default_factory=dict)   # (value, IrType) -> IrValue
    n_constants: int = 0
    phi_slots: dict = field(default_factory=dict)   # FIR block -> [(phi, start, count)]
    return_hook: object = None

    @property
    def dialects(self):
        return self.registry.dialects

    def set_block(self, block: ir.IrBlock):
        self.block = block
        self.module.set_insertion(block)

    def build_op(self, name, operands=(), attributes=None, regions=None,
                 successors=None, result_types=None) -> ir.IrOperation:
        self.module.set_insertion(self.block)
        return dl.build_op(self.dialects, self.module, name, operands,
                           attributes, regions, successors, result_types)


def _default_goto(ctx: BuilderContext, target, args):
    ctx.build_op("cf.br", successors=[(target, args)])


def _default_gotoifnot(ctx: BuilderContext, cond, true_block, true_args,
                       false_block, false_args):
    ctx.build_op("cf.cond_br", [cond],
                 successors=[(true_block, true_args), (false_block, false_args)])


def _default_return(ctx: BuilderContext, values):
    ctx.build_op("func.return", values)


def materialize_constant(ctx: BuilderContext, literal, target_type) -> ir.IrValue:
    """One deduplicated arith.constant in the entry block per (value, type)."""
    ir_types = map_type(ctx.registry, target_type)
    if len(ir_types) != 1 or not ir.is_scalar(ir_types[0]):
        raise CodegenError(f"cannot materialize a literal of type {target_type}")
    t = ir_types[0]

    value = literal.value if isinstance(literal, fir.FirArg) else literal
    if isinstance(t, (ir.Float32Type, ir.Float64Type)):
        if isinstance(value, bool):
            raise CodegenError(f"boolean literal is not representable as {t}")
        if isinstance(value, int):
            limit = 2 ** 24 if isinstance(t, ir.Float32Type) else 2 ** 53
            if abs(value) > limit:
                raise CodegenError(
                    f"integer literal {value} is not exactly representable as {t}")
        value = float(value)
        attr = ir.FloatAttr(value, t)
    elif isinstance(t, ir.IntType):
        if isinstance(value, float):
            if value != int(value):
                raise CodegenError(
                    f"literal {value} is not representable as {t}")
            value = int(value)
        value = int(value)
        half = 2 ** (t.width - 1)
        if not -half <= value < 2 * half:
            raise CodegenError(f"literal {value} does not fit in {t}")
        attr = ir.IntAttr(value, t)
    else:  # index
        if isinstance(value, float) or isinstance(value, bool):
            raise CodegenError(f"literal {value!r} is not representable as index")
        attr = ir.IntAttr(int(value), t)

    key = (attr.value, t)
    cached = ctx.constants.get(key)
    if cached is not None:
        return cached
    ctx.module.set_insertion(ctx.entry_block, ctx.n_constants)
    op = dl.build_op(ctx.dialects, ctx.module, "arith.constant",
                     attributes={"value": attr})
    ctx.module.set_insertion(ctx.block)
    ctx.n_constants += 1
    v = op.results[0]
    ctx.constants[key] = v
    return v


# ---------------------------------------------------------------------------
# Statement translation


def _is_literal(arg) -> bool:
    return isinstance(arg, (fir.IntLit, fir.FloatLit, fir.BoolLit))


def _literal_promotable(lit, param_type) -> bool:
    if not isinstance(param_type, fir.Concrete):
        return False
    if isinstance(lit, fir.BoolLit):
        return param_type in (fir.BOOL, fir.I1)
    if isinstance(lit, fir.IntLit):
        if param_type in (fir.I64, fir.INDEX):
            return True
        if param_type == fir.F32:
            return abs(lit.value) <= 2 ** 24
        if param_type == fir.F64:
            return abs(lit.value) <= 2 ** 53
        if param_type in (fir.I1, fir.BOOL):
            return lit.value in (0, 1)
        return False
    if isinstance(lit, fir.FloatLit):
        return param_type in (fir.F32, fir.F64)
    return False


def _resolve_call(registry: IntrinsicRegistry, name: str, args, natural_types):
    """Dispatch with literal promotion: natural types first, then retry
    admitting literal arguments wherever they promote to the parameter type."""
    try:
        return resolve_method(registry, name, natural_types)
    except NoMethodError:
        if not any(_is_literal(a) for a in args):
            raise
    applicable = []
    for sig, builder in registry.methods.get(name, []):
        if len(sig.param_types) != len(args):
            continue
        ok = True
        for arg, natural, param in zip(args, natural_types, sig.param_types):
            if _is_literal(arg):
                ok = fir.subtype(natural, param) or _literal_promotable(arg, param)
            else:
                ok = fir.subtype(natural, param)
            if not ok:
                break
        if ok:
            applicable.append((sig, builder))
    if not applicable:
        probe = IntrinsicSignature(name, tuple(natural_types))
        raise NoMethodError(f"no method matching {probe} (with literal promotion)")
    best = applicable[0]
    for cand in applicable[1:]:
        if _pointwise_le(cand[0], best[0]):
            best = cand
    for cand in applicable:
        if not _pointwise_le(best[0], cand[0]):
            raise AmbiguousMethodError(
                f"ambiguous call to {name} with literal promotion; candidates: "
                + ", ".join(str(s) for s, _ in applicable))
    return best


class _Translator:
    def __init__(self, ctx: BuilderContext, fn: fir.FirFunction):
        self.ctx = ctx
        self.fn = fn
        self.types = {}
        for _, st in fn.statements():
            if isinstance(st, (fir.Invoke, fir.Phi)):
                self.types[st.id] = st.result_type

    def arg_frontend_type(self, arg):
        return fir.arg_type(self.fn, arg, _types=self.types)

    def arg_values(self, arg, literal_type=None):
        """IR values for a frontend argument; literals are materialized."""
        ctx = self.ctx
        if isinstance(arg, fir.SsaRef):
            return list(ctx.values[("ssa", arg.id)])
        if isinstance(arg, fir.ParamRef):
            return list(ctx.values[("param", arg.index)])
        if _is_literal(arg):
            t = literal_type
            if t is None or not isinstance(t, fir.Concrete):
                t = self.arg_frontend_type(arg)
            return [materialize_constant(ctx, arg.value, t)]
        raise CodegenError(f"cannot translate argument {arg!r}")

    def phi_edge_args(self, target: int, pred: int):
        """Values a branch from ``pred`` must pass for ``target``'s phis."""
        out = []
        for phi, _, _ in self.ctx.phi_slots.get(target, []):
            incoming = {p: a for p, a in phi.incomings}
            if pred not in incoming:
                raise CodegenError(
                    f"phi %{phi.id} in block {target} has no incoming value "
                    f"for predecessor #{pred}")
            out.extend(self.arg_values(incoming[pred], phi.result_type))
        return out

    def translate_invoke(self, st: fir.Invoke, block_number: int):
        ctx = self.ctx
        if st.target == fir.BOOL_CONVERSION:
            if len(st.args) != 1:
                raise CodegenError(
                    f"%{st.id}: {fir.BOOL_CONVERSION} takes one argument")
            arg = st.args[0]
            cond_type = self.arg_frontend_type(arg)
            conv = ctx.registry.bool_conversions.get(cond_type)
            if conv is not None:
                values = conv(ctx, self.arg_values(arg))
            else:
                values = self.arg_values(arg, fir.BOOL if _is_literal(arg) else None)
                if [v.type for v in values] != [ir.I1]:
                    raise CodegenError(
                        f"%{st.id}: no bool conversion registered for "
                        f"condition type {cond_type}")
            ctx.values[("ssa", st.id)] = list(values)
            return
        natural = [self.arg_frontend_type(a) for a in st.args]
        try:
            sig, builder = _resolve_call(ctx.registry, st.target, st.args, natural)
        except (NoMethodError, AmbiguousMethodError) as e:
            raise type(e)(f"%{st.id} in block {block_number}: {e}") from None
        arg_values = [
            self.arg_values(a, sig.param_types[i] if _is_literal(a) else None)
            for i, a in enumerate(st.args)
        ]
        results = builder(ctx, arg_values)
        ctx.values[("ssa", st.id)] = list(results or [])

    def translate_block(self, number: int, statements):
        ctx = self.ctx
        ctx.set_block(ctx.block_map[number])

        terminated = False
        for st in statements:
            if isinstance(st, fir.Invoke):
                self.translate_invoke(st, number)
            elif isinstance(st, fir.Phi):
                slot = [s for s in ctx.phi_slots.get(number, ()) if s[0] is st]
                if not slot:
                    raise CodegenError(
                        f"phi %{st.id} is not at the head of block {number}")
                _, start, count = slot[0]
                block = ctx.block_map[number]
                ctx.values[("ssa", st.id)] = block.arguments[start:start + count]
            elif isinstance(st, fir.Nothing):
                continue
            elif isinstance(st, fir.Goto):
                target = ctx.block_map[st.target]
                args = self.phi_edge_args(st.target, number)
                ctx.registry.generate_goto(ctx, target, args)
                terminated = True
            elif isinstance(st, fir.GotoIfNot):
                cond_values = self.arg_values(st.cond)
                if [v.type for v in cond_values] != [ir.I1]:
                    t = self.arg_frontend_type(st.cond)
                    raise CodegenError(
                        f"block {number}: branch condition of type {t} did not "
                        f"lower to i1; missing bool conversion")
                # fall-through-on-true: the lexically next block, which the
                # fallthrough edge itself keeps reachable
                true_number = number + 1
                if true_number not in ctx.block_map:
                    raise CodegenError(
                        f"block {number}: conditional branch falls off the end")
                ctx.registry.generate_gotoifnot(
                    ctx,
                    cond_values[0],
                    ctx.block_map[true_number],
                    self.phi_edge_args(true_number, number),
                    ctx.block_map[st.target],
                    self.phi_edge_args(st.target, number),
                )
                terminated = True
            elif isinstance(st, fir.Return):
                values = [] if st.value is None else self.arg_values(st.value)
                hook = ctx.return_hook or ctx.registry.generate_return
                hook(ctx, values)
                terminated = True
            else:
                raise CodegenError(f"cannot translate statement {st!r}")
        if not terminated:
            target = number + 1
            if target not in ctx.block_map:
                raise CodegenError(
                    f"block {number}: falls off the end of the function")
            ctx.registry.generate_goto(ctx, ctx.block_map[target],
                                       self.phi_edge_args(target, number))


def _return_type(fn: fir.FirFunction):
    kinds = []
    for _, st in fn.statements():
        if isinstance(st, fir.Return):
            if st.value is None:
                kinds.append(fir.NOTHING)
            else:
                kinds.append(fir.arg_type(fn, st.value))
    if not kinds:
        return fir.NOTHING
    first = kinds[0]
    for k in kinds[1:]:
        if k != first:
            raise CodegenError(
                f"inconsistent return types: {first} vs {k}")
    return first


def _prepare_blocks(ctx: BuilderContext, registry, fn: fir.FirFunction,
                    entry_args_types):
    """Pre-create one block per reachable source block, with one argument
    group per phi at the block head."""
    reachable = sorted(fir.reachable_blocks(fn))
    preds = fir.predecessors(fn)
    if preds[1]:
        raise CodegenError("the entry block may not be a branch target")
    for number in reachable:
        if number == 1:
            block = ctx.module.append_block(ctx.region, entry_args_types)
        else:
            arg_types = []
            slots = []
            for st in fn.blocks[number - 1]:
                if not isinstance(st, fir.Phi):
                    break
                ts = map_type(registry, st.result_type)
                slots.append((st, len(arg_types), len(ts)))
                arg_types.extend(ts)
            block = ctx.module.append_block(ctx.region, arg_types)
            ctx.phi_slots[number] = slots
        ctx.block_map[number] = block
    ctx.entry_block = ctx.block_map[1]
    if any(isinstance(st, fir.Phi) for st in fn.blocks[0]):
        raise CodegenError("phi in the entry block is not supported")


def _translate_into(ctx: BuilderContext, registry: IntrinsicRegistry,
                    fn: fir.FirFunction, arg_types):
    if list(arg_types) != list(fn.param_types):
        raise CodegenError(
            f"argument types {[str(t) for t in arg_types]} do not match the "
            f"declared parameter types of '{fn.name}'")
    entry_types = []
    spans = []
    for t in arg_types:
        ts = map_type(registry, t)
        spans.append((len(entry_types), len(ts)))
        entry_types.extend(ts)
    _prepare_blocks(ctx, registry, fn, entry_types)
    entry = ctx.block_map[1]
    for i, (start, count) in enumerate(spans, start=1):
        ctx.values[("param", i)] = entry.arguments[start:start + count]
    translator = _Translator(ctx, fn)
    for number in sorted(ctx.block_map):
        translator.translate_block(number, fn.blocks[number - 1])


def generate(registry: IntrinsicRegistry, fn: fir.FirFunction, arg_types,
             module: ir.IrModule = None, symbol: str = None) -> ir.IrModule:
    """Translate ``fn`` into a module holding one func.func symbol.

    The function must be validated, fully inlined, and bool-converted.
    """
    module = module or ir.IrModule(registry=registry.dialects)
    ret = _return_type(fn)
    result_types = map_type(registry, ret)
    entry_types = []
    for t in arg_types:
        entry_types.extend(map_type(registry, t))
    ftype = ir.FunctionType(tuple(entry_types), tuple(result_types))
    region = module.new_region()
    module.set_insertion(module.body.blocks[0])
    dl.build_op(registry.dialects, module, "func.func",
                attributes={
                    "sym_name": ir.SymbolAttr(symbol or fn.name),
                    "function_type": ir.TypeAttr(ftype),
                },
                regions=[region])
    ctx = BuilderContext(module=module, registry=registry, region=region,
                         entry_block=None)
    _translate_into(ctx, registry, fn, arg_types)
    return module


def generate_region(ctx: BuilderContext, registry: IntrinsicRegistry,
                    fn: fir.FirFunction, arg_types, return_hook) -> ir.IrRegion:
    """Translate ``fn`` into a fresh region of the enclosing module.

    Return statements run ``return_hook`` (e.g. a linalg.yield builder)
    instead of emitting func.return. Used by intrinsics that wrap nested
    code in a region-carrying operation.
    """
    region = ctx.module.new_region()
    sub = BuilderContext(module=ctx.module, registry=registry, region=region,
                         entry_block=None, return_hook=return_hook)
    _translate_into(sub, registry, fn, arg_types)
    ctx.module.set_insertion(ctx.block)
    return region
