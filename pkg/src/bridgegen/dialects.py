"""Declarative dialect definitions and typed, verified operation builders.

Dialects are described in a small line-oriented text format (see
:func:`load_dialect_spec`), registered into a :class:`DialectRegistry`, and
used through :func:`build_op`, which checks operands eagerly and resolves
result types from the declared constraints.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from . import ir
from .ir import (
    Diagnostic,
    IrModule,
    IrOperation,
    IrType,
    F32,
    F64,
    I1,
    I64,
    INDEX,
)

__all__ = [
    "Constraint",
    "ExactType",
    "AnyFloat",
    "AnyInteger",
    "AnyTensor",
    "AnyMemRef",
    "AnyType",
    "SameAsOperand",
    "ElemOf",
    "OperandSpec",
    "AttrSpec",
    "OpDefinition",
    "DialectDefinition",
    "DialectRegistry",
    "DialectSpecError",
    "BuildError",
    "load_dialect_spec",
    "serialize_dialect",
    "register_dialect",
    "build_op",
    "builtin_registry",
]


class DialectSpecError(Exception):
    """Malformed dialect spec text; carries the offending line number."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class BuildError(Exception):
    """Raised by build_op when the requested operation is invalid."""


# ---------------------------------------------------------------------------
# Type constraints


class Constraint:
    pass


@dataclass(frozen=True)
class ExactType(Constraint):
    type: IrType


@dataclass(frozen=True)
class AnyFloat(Constraint):
    pass


@dataclass(frozen=True)
class AnyInteger(Constraint):
    pass


@dataclass(frozen=True)
class AnyTensor(Constraint):
    pass


@dataclass(frozen=True)
class AnyMemRef(Constraint):
    pass


@dataclass(frozen=True)
class AnyType(Constraint):
    pass


@dataclass(frozen=True)
class SameAsOperand(Constraint):
    index: int


@dataclass(frozen=True)
class ElemOf(Constraint):
    """Element type of the tensor/memref at operand ``index``."""

    index: int


_EXACT = {"f32": F32, "f64": F64, "i1": I1, "i64": I64, "index": INDEX}


def parse_constraint(text: str) -> Constraint:
    if text in _EXACT:
        return ExactType(_EXACT[text])
    if text == "AnyFloat":
        return AnyFloat()
    if text == "AnyInteger":
        return AnyInteger()
    if text == "AnyTensor":
        return AnyTensor()
    if text == "AnyMemRef":
        return AnyMemRef()
    if text == "Any":
        return AnyType()
    m = re.fullmatch(r"same\((\d+)\)", text)
    if m:
        return SameAsOperand(int(m.group(1)))
    m = re.fullmatch(r"elem\((\d+)\)", text)
    if m:
        return ElemOf(int(m.group(1)))
    raise ValueError(f"unknown type constraint '{text}'")


def constraint_text(c: Constraint) -> str:
    if isinstance(c, ExactType):
        return ir.print_type(c.type)
    if isinstance(c, AnyFloat):
        return "AnyFloat"
    if isinstance(c, AnyInteger):
        return "AnyInteger"
    if isinstance(c, AnyTensor):
        return "AnyTensor"
    if isinstance(c, AnyMemRef):
        return "AnyMemRef"
    if isinstance(c, AnyType):
        return "Any"
    if isinstance(c, SameAsOperand):
        return f"same({c.index})"
    if isinstance(c, ElemOf):
        return f"elem({c.index})"
    raise ValueError(f"unknown constraint {c!r}")


def _elem_of(t: IrType):
    if isinstance(t, (ir.TensorType, ir.MemRefType)):
        return t.elem
    return None


def constraint_admits(c: Constraint, t: IrType, operand_types) -> bool:
    if isinstance(c, ExactType):
        return t == c.type
    if isinstance(c, AnyFloat):
        return ir.is_float(t)
    if isinstance(c, AnyInteger):
        return ir.is_integer(t)
    if isinstance(c, AnyTensor):
        return isinstance(t, ir.TensorType)
    if isinstance(c, AnyMemRef):
        return isinstance(t, ir.MemRefType)
    if isinstance(c, AnyType):
        return True
    if isinstance(c, SameAsOperand):
        return c.index < len(operand_types) and t == operand_types[c.index]
    if isinstance(c, ElemOf):
        if c.index >= len(operand_types):
            return False
        return t == _elem_of(operand_types[c.index])
    raise ValueError(f"unknown constraint {c!r}")


def resolve_constraint(c: Constraint, operand_types):
    """The unique type satisfying ``c`` given the operand types, or None."""
    if isinstance(c, ExactType):
        return c.type
    if isinstance(c, SameAsOperand):
        if c.index < len(operand_types):
            return operand_types[c.index]
        return None
    if isinstance(c, ElemOf):
        if c.index < len(operand_types):
            return _elem_of(operand_types[c.index])
        return None
    return None


# ---------------------------------------------------------------------------
# Definitions


@dataclass(frozen=True)
class OperandSpec:
    name: str
    constraint: Constraint
    variadic: bool = False


_ATTR_KINDS = ("float", "int", "string", "array", "symbol", "type", "any")


@dataclass(frozen=True)
class AttrSpec:
    name: str
    kind: str
    required: bool = False


@dataclass(frozen=True)
class OpDefinition:
    name: str  # qualified, e.g. "arith.addf"
    doc: str
    operands: tuple = ()
    results: tuple = ()
    attrs: tuple = ()
    regions: int = 0
    is_terminator: bool = False
    successors: object = 0  # int or "variadic"

    @property
    def short_name(self) -> str:
        return self.name.split(".", 1)[1]


@dataclass
class DialectDefinition:
    name: str
    ops: dict = field(default_factory=dict)  # short name -> OpDefinition


class DialectRegistry:
    """Immutable-after-setup map from dialect name to its definition."""

    def __init__(self):
        self.dialects = {}

    def lookup(self, qualified_name: str):
        dialect, _, short = qualified_name.partition(".")
        d = self.dialects.get(dialect)
        if d is None:
            return None
        return d.ops.get(short)

    def validate_op(self, op: IrOperation):
        """Diagnostics for one operation against its registered definition."""
        defn = self.lookup(op.name)
        if defn is None:
            return [Diagnostic("unknown-op", f"'{op.name}' is not registered", op.name)]
        diags = []
        operand_types = [v.type for v in op.operands]
        result_types = [v.type for v in op.results]
        for what, specs, types in (("operand", defn.operands, operand_types),
                                   ("result", defn.results, result_types)):
            fixed = [s for s in specs if not s.variadic]
            variadic = [s for s in specs if s.variadic]
            if len(types) < len(fixed) or (not variadic and len(types) != len(fixed)):
                diags.append(Diagnostic(
                    "arity-mismatch",
                    f"expected {len(fixed)}{'+' if variadic else ''} {what}(s), "
                    f"got {len(types)}", op.name))
                continue
            for i, t in enumerate(types):
                spec = specs[i] if i < len(fixed) else variadic[0]
                if not constraint_admits(spec.constraint, t, operand_types):
                    diags.append(Diagnostic(
                        "type-constraint",
                        f"{what} '{spec.name}' ({what} {i}) violates "
                        f"{constraint_text(spec.constraint)}, got {ir.print_type(t)}",
                        op.name))
        for a in defn.attrs:
            present = a.name in op.attributes
            if a.required and not present:
                diags.append(Diagnostic(
                    "missing-attr", f"required attribute '{a.name}' missing", op.name))
            elif present and not _attr_kind_ok(op.attributes[a.name], a.kind):
                diags.append(Diagnostic(
                    "type-constraint",
                    f"attribute '{a.name}' is not of kind {a.kind}", op.name))
        if len(op.regions) != defn.regions:
            diags.append(Diagnostic(
                "region-count",
                f"expected {defn.regions} region(s), got {len(op.regions)}", op.name))
        n_succ = len(op.successors)
        if defn.successors != "variadic" and n_succ != defn.successors:
            diags.append(Diagnostic(
                "bad-successor",
                f"expected {defn.successors} successor(s), got {n_succ}", op.name))
        if n_succ and not defn.is_terminator:
            diags.append(Diagnostic(
                "bad-successor", "non-terminator op has successors", op.name))
        return diags


def _attr_kind_ok(attr, kind: str) -> bool:
    if kind == "any":
        return True
    return {
        "float": ir.FloatAttr,
        "int": ir.IntAttr,
        "string": ir.StringAttr,
        "array": ir.ArrayAttr,
        "symbol": ir.SymbolAttr,
        "type": ir.TypeAttr,
    }[kind].__instancecheck__(attr)


# ---------------------------------------------------------------------------
# Spec format


def load_dialect_spec(text: str) -> DialectDefinition:
    """Parse the line-oriented dialect spec format.

    Format::

        dialect <name>
        op <short-name> "docstring"
          operand <name> [variadic] <constraint>
          result <name> [variadic] <constraint>
          attr <name> <kind> [required]
          regions <n>
          terminator [successors <n|variadic>]

    Full-line comments start with ``#``. Constraints: ``f32 | f64 | i1 |
    i64 | index | AnyFloat | AnyInteger | AnyTensor | AnyMemRef | Any |
    same(<k>) | elem(<k>)``.
    """
    dialect = None
    pending = None  # accumulating op fields until the next header

    def finish():
        nonlocal pending
        if pending is None:
            return
        name, lineno = pending["name"], pending["line"]
        operands, results = pending["operands"], pending["results"]
        for what, specs in (("operand", operands), ("result", results)):
            for i, s in enumerate(specs):
                if s.variadic and i != len(specs) - 1:
                    raise DialectSpecError(
                        lineno, f"variadic {what} '{s.name}' must come last")
                c = s.constraint
                if isinstance(c, SameAsOperand):
                    limit = i if what == "operand" else len(operands)
                    if c.index >= limit:
                        raise DialectSpecError(
                            lineno,
                            f"same({c.index}) on {what} '{s.name}' does not "
                            f"reference a lower-indexed operand")
                if isinstance(c, ElemOf) and c.index >= len(operands):
                    raise DialectSpecError(
                        lineno, f"elem({c.index}) on {what} '{s.name}' is dangling")
        if pending["successors"] != 0 and not pending["terminator"]:
            raise DialectSpecError(lineno, "successors require 'terminator'")
        if name in dialect.ops:
            raise DialectSpecError(lineno, f"duplicate op name '{name}'")
        dialect.ops[name] = OpDefinition(
            name=f"{dialect.name}.{name}",
            doc=pending["doc"],
            operands=tuple(operands),
            results=tuple(results),
            attrs=tuple(pending["attrs"]),
            regions=pending["regions"],
            is_terminator=pending["terminator"],
            successors=pending["successors"],
        )
        pending = None

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        words = line.split()
        head = words[0]
        if head == "dialect":
            if dialect is not None:
                raise DialectSpecError(lineno, "only one dialect per spec")
            if len(words) != 2:
                raise DialectSpecError(lineno, "expected 'dialect <name>'")
            dialect = DialectDefinition(words[1])
            continue
        if head == "op":
            if dialect is None:
                raise DialectSpecError(lineno, "'op' before 'dialect' header")
            finish()
            m = re.fullmatch(r'op\s+(\S+)\s+"(.*)"', line)
            if not m:
                raise DialectSpecError(lineno, "expected 'op <name> \"docstring\"'")
            pending = {"name": m.group(1), "doc": m.group(2), "line": lineno,
                       "operands": [], "results": [], "attrs": [],
                       "regions": 0, "terminator": False, "successors": 0}
            continue
        if pending is None:
            raise DialectSpecError(lineno, f"'{head}' outside an op")
        if head in ("operand", "result"):
            rest = words[1:]
            if len(rest) == 3 and rest[1] == "variadic":
                name, c_text, variadic = rest[0], rest[2], True
            elif len(rest) == 2:
                name, c_text, variadic = rest[0], rest[1], False
            else:
                raise DialectSpecError(
                    lineno, f"expected '{head} <name> [variadic] <constraint>'")
            try:
                c = parse_constraint(c_text)
            except ValueError as e:
                raise DialectSpecError(lineno, str(e)) from None
            pending[head + "s"].append(OperandSpec(name, c, variadic))
        elif head == "attr":
            rest = words[1:]
            required = False
            if rest and rest[-1] == "required":
                required = True
                rest = rest[:-1]
            if len(rest) != 2 or rest[1] not in _ATTR_KINDS:
                raise DialectSpecError(
                    lineno, "expected 'attr <name> <kind> [required]'")
            pending["attrs"].append(AttrSpec(rest[0], rest[1], required))
        elif head == "regions":
            if len(words) != 2 or not words[1].isdigit():
                raise DialectSpecError(lineno, "expected 'regions <n>'")
            pending["regions"] = int(words[1])
        elif head == "terminator":
            succ = 0
            if len(words) == 3 and words[1] == "successors":
                if words[2] == "variadic":
                    succ = "variadic"
                elif words[2].isdigit():
                    succ = int(words[2])
                else:
                    raise DialectSpecError(
                        lineno, "expected 'successors <n|variadic>'")
            elif len(words) != 1:
                raise DialectSpecError(
                    lineno, "expected 'terminator [successors <n|variadic>]'")
            pending["terminator"] = True
            pending["successors"] = succ
        else:
            raise DialectSpecError(lineno, f"unknown directive '{head}'")
    if dialect is None:
        raise DialectSpecError(0, "missing 'dialect' header")
    finish()
    return dialect


def serialize_dialect(defn: DialectDefinition) -> str:
    """Render a definition back into the dialect text format.

    load_dialect_spec(serialize_dialect(d)) reproduces d exactly.
    """
    out = [f"dialect {defn.name}"]
    for short, op in defn.ops.items():
        out.append("")
        out.append(f'op {short} "{op.doc}"')
        for s in op.operands:
            v = "variadic " if s.variadic else ""
            out.append(f"  operand {s.name} {v}{constraint_text(s.constraint)}")
        for s in op.results:
            v = "variadic " if s.variadic else ""
            out.append(f"  result {s.name} {v}{constraint_text(s.constraint)}")
        for a in op.attrs:
            req = " required" if a.required else ""
            out.append(f"  attr {a.name} {a.kind}{req}")
        if op.regions:
            out.append(f"  regions {op.regions}")
        if op.is_terminator:
            if op.successors == 0:
                out.append("  terminator")
            else:
                out.append(f"  terminator successors {op.successors}")
    return "\n".join(out) + "\n"


def register_dialect(registry: DialectRegistry, defn: DialectDefinition) -> DialectRegistry:
    if defn.name in registry.dialects:
        raise BuildError(f"dialect '{defn.name}' already registered")
    registry.dialects[defn.name] = defn
    return registry


# ---------------------------------------------------------------------------
# Building


def build_op(registry: DialectRegistry, module: IrModule, qualified_name: str,
             operands=(), attributes=None, regions=None, successors=None,
             result_types=None) -> IrOperation:
    """Build a verified operation at the module's insertion point.

    Operand arity and type constraints are checked eagerly; result types
    are resolved from the declared constraints where they determine a
    unique type, otherwise ``result_types`` must be supplied.
    """
    defn = registry.lookup(qualified_name)
    if defn is None:
        raise BuildError(f"unknown operation '{qualified_name}'")
    operands = list(operands)
    attributes = dict(attributes or {})
    operand_types = [v.type for v in operands]

    fixed = [s for s in defn.operands if not s.variadic]
    variadic = [s for s in defn.operands if s.variadic]
    if len(operands) < len(fixed) or (not variadic and len(operands) != len(fixed)):
        raise BuildError(
            f"{qualified_name}: expected {len(fixed)}{'+' if variadic else ''} "
            f"operand(s), got {len(operands)}")
    for i, t in enumerate(operand_types):
        spec = defn.operands[i] if i < len(fixed) else variadic[0]
        if not constraint_admits(spec.constraint, t, operand_types):
            raise BuildError(
                f"{qualified_name}: operand '{spec.name}' (operand {i}) violates "
                f"{constraint_text(spec.constraint)}, got {ir.print_type(t)}")
    for a in defn.attrs:
        if a.required and a.name not in attributes:
            raise BuildError(f"{qualified_name}: missing required attribute '{a.name}'")
        if a.name in attributes and not _attr_kind_ok(attributes[a.name], a.kind):
            raise BuildError(
                f"{qualified_name}: attribute '{a.name}' is not of kind {a.kind}")

    if result_types is None:
        result_types = []
        for s in defn.results:
            if s.variadic:
                raise BuildError(
                    f"{qualified_name}: variadic results; pass result_types")
            t = resolve_constraint(s.constraint, operand_types)
            if t is None and s.name and "value" in attributes:
                value = attributes["value"]
                t = getattr(value, "type", None)
            if t is None:
                raise BuildError(
                    f"{qualified_name}: cannot infer type of result '{s.name}'; "
                    f"pass result_types")
            result_types.append(t)
    else:
        result_types = list(result_types)
        fixed_r = [s for s in defn.results if not s.variadic]
        variadic_r = [s for s in defn.results if s.variadic]
        if len(result_types) < len(fixed_r) or (
                not variadic_r and len(result_types) != len(fixed_r)):
            raise BuildError(
                f"{qualified_name}: expected {len(fixed_r)}"
                f"{'+' if variadic_r else ''} result(s), got {len(result_types)}")
        for i, t in enumerate(result_types):
            spec = defn.results[i] if i < len(fixed_r) else variadic_r[0]
            if not constraint_admits(spec.constraint, t, operand_types):
                raise BuildError(
                    f"{qualified_name}: result '{spec.name}' violates "
                    f"{constraint_text(spec.constraint)}, got {ir.print_type(t)}")

    n_regions = len(regions or [])
    if n_regions != defn.regions:
        raise BuildError(
            f"{qualified_name}: expected {defn.regions} region(s), got {n_regions}")
    n_succ = len(successors or [])
    if defn.successors != "variadic" and n_succ != defn.successors:
        raise BuildError(
            f"{qualified_name}: expected {defn.successors} successor(s), got {n_succ}")

    op = ir.create_op(module, qualified_name, operands, result_types,
                      attributes, regions, successors,
                      is_terminator=defn.is_terminator)
    return op


def op_doc(registry: DialectRegistry, qualified_name: str) -> str:
    """Docstring attached to an op definition."""
    defn = registry.lookup(qualified_name)
    if defn is None:
        raise BuildError(f"unknown operation '{qualified_name}'")
    return defn.doc


# ---------------------------------------------------------------------------
# Builtin dialect subsets

ARITH_SPEC = """\
# Basic integer and floating point arithmetic.
dialect arith

op constant "Materializes a compile-time constant given by the 'value' attribute."
  attr value any required
  result res Any

op addf "Floating point addition."
  operand lhs AnyFloat
  operand rhs same(0)
  result res same(0)

op subf "Floating point subtraction."
  operand lhs AnyFloat
  operand rhs same(0)
  result res same(0)

op mulf "Floating point multiplication."
  operand lhs AnyFloat
  operand rhs same(0)
  result res same(0)

op divf "Floating point division."
  operand lhs AnyFloat
  operand rhs same(0)
  result res same(0)

op negf "Floating point negation."
  operand value AnyFloat
  result res same(0)

op addi "Integer addition (also defined on index)."
  operand lhs AnyInteger
  operand rhs same(0)
  result res same(0)

op subi "Integer subtraction (also defined on index)."
  operand lhs AnyInteger
  operand rhs same(0)
  result res same(0)

op muli "Integer multiplication (also defined on index)."
  operand lhs AnyInteger
  operand rhs same(0)
  result res same(0)

op cmpi "Integer comparison; 'predicate' is one of eq|ne|slt|sle|sgt|sge."
  operand lhs AnyInteger
  operand rhs same(0)
  attr predicate string required
  result res i1

op index_cast "Cast between index and a fixed-width integer type."
  operand in AnyInteger
  result res AnyInteger
"""

MATH_SPEC = """\
# Transcendental math functions.
dialect math

op exp "Natural exponential."
  operand value AnyFloat
  result res same(0)
"""

CF_SPEC = """\
# Unstructured control flow between blocks of one region.
dialect cf

op br "Unconditional branch; block arguments travel on the successor edge."
  terminator successors 1

op cond_br "Two-way branch on an i1 condition (true successor first)."
  operand condition i1
  terminator successors 2
"""

FUNC_SPEC = """\
# Function definition, return, and direct calls.
dialect func

op func "Function definition; the body region's entry arguments are the parameters."
  attr sym_name symbol required
  attr function_type type required
  regions 1

op return "Function terminator returning the operand values to the caller."
  operand operands variadic Any
  terminator

op call "Direct call of a func.func symbol in the same module."
  operand operands variadic Any
  attr callee symbol required
  result results variadic Any
"""

LINALG_SPEC = """\
# Structured linear-algebra operations on tensors.
dialect linalg

op generic "Generic structured op; indexing maps and iterator types drive the loop nest around the body region."
  operand operands variadic AnyTensor
  attr indexing_maps array required
  attr iterator_types array required
  regions 1
  result results variadic AnyTensor

op yield "Yields per-element results from a structured-op body."
  operand values variadic Any
  terminator
"""

GPU_SPEC = """\
# Thread-indexing queries for GPU-style kernels.
dialect gpu

op thread_id "Index of the executing thread within its block along dimension x|y|z."
  attr dimension string required
  result res index

op block_id "Index of the executing thread's block along dimension x|y|z."
  attr dimension string required
  result res index

op block_dim "Number of threads per block along dimension x|y|z."
  attr dimension string required
  result res index
"""

MEMREF_SPEC = """\
# Loads and stores against memref buffers.
dialect memref

op load "Reads one element at the given indices."
  operand memref AnyMemRef
  operand indices variadic index
  result res elem(0)

op store "Writes 'value' at the given indices."
  operand value elem(1)
  operand memref AnyMemRef
  operand indices variadic index
"""

BUILTIN_SPECS = (ARITH_SPEC, MATH_SPEC, CF_SPEC, FUNC_SPEC, LINALG_SPEC,
                 GPU_SPEC, MEMREF_SPEC)


def builtin_registry() -> DialectRegistry:
    """Registry preloaded with the builtin dialect subsets."""
    registry = DialectRegistry()
    for spec in BUILTIN_SPECS:
        register_dialect(registry, load_dialect_spec(spec))
    return registry
