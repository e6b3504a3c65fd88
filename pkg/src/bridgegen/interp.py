"""Reference evaluator for generated IR.

Executes scalar and control-flow operations with IEEE-754 semantics at the
declared precision, runs linalg.generic as its full iteration-space loop
nest, and simulates a GPU thread grid for kernels built on the gpu
dialect. Used as the numeric oracle for translations.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import ir

__all__ = [
    "InterpError",
    "StepLimitExceeded",
    "MissingLaunchConfig",
    "OutOfBounds",
    "RuntimeValue",
    "F32Value",
    "F64Value",
    "IntValue",
    "IndexValue",
    "TensorValue",
    "MemRefValue",
    "LaunchConfig",
    "DEFAULT_STEP_LIMIT",
    "value_of_type",
    "run_function",
    "run_kernel",
]

DEFAULT_STEP_LIMIT = 10 ** 7


class InterpError(Exception):
    pass


class StepLimitExceeded(InterpError):
    pass


class MissingLaunchConfig(InterpError):
    pass


class OutOfBounds(InterpError):
    pass


# ---------------------------------------------------------------------------
# Runtime values


class RuntimeValue:
    pass


@dataclass
class F32Value(RuntimeValue):
    value: float

    def __post_init__(self):
        self.value = float(np.float32(self.value))


@dataclass
class F64Value(RuntimeValue):
    value: float


def _wrap_int(value: int, width: int) -> int:
    if width == 1:  # boolean: no sign bit
        return int(value) & 1
    half = 1 << (width - 1)
    return ((int(value) + half) % (half << 1)) - half


@dataclass
class IntValue(RuntimeValue):
    width: int
    value: int

    def __post_init__(self):
        self.value = _wrap_int(self.value, self.width)


@dataclass
class IndexValue(RuntimeValue):
    value: int


@dataclass
class TensorValue(RuntimeValue):
    elem: ir.IrType
    dims: tuple
    data: np.ndarray  # row-major, shape == dims

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=_np_dtype(self.elem)).reshape(self.dims)


@dataclass
class MemRefValue(RuntimeValue):
    elem: ir.IrType
    dims: tuple
    data: np.ndarray  # shared, mutable

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=_np_dtype(self.elem)).reshape(self.dims)


@dataclass(frozen=True)
class LaunchConfig:
    grid: tuple  # block counts (gx, gy, gz)
    block: tuple  # threads per block (bx, by, bz)

    def __post_init__(self):
        if any(e < 1 for e in self.grid + self.block):
            raise InterpError("launch extents must all be >= 1")


def _np_dtype(t: ir.IrType):
    if isinstance(t, ir.Float32Type):
        return np.float32
    if isinstance(t, ir.Float64Type):
        return np.float64
    if isinstance(t, (ir.IntType, ir.IndexType)):
        return np.int64
    raise InterpError(f"no runtime element kind for {t}")


def value_of_type(t: ir.IrType, raw) -> RuntimeValue:
    """Wrap a plain Python value as a RuntimeValue of IR type ``t``."""
    if isinstance(t, ir.Float32Type):
        return F32Value(float(raw))
    if isinstance(t, ir.Float64Type):
        return F64Value(float(raw))
    if isinstance(t, ir.IntType):
        return IntValue(t.width, int(raw))
    if isinstance(t, ir.IndexType):
        return IndexValue(int(raw))
    if isinstance(t, ir.TensorType):
        arr = np.asarray(raw, dtype=_np_dtype(t.elem))
        return TensorValue(t.elem, arr.shape, arr)
    if isinstance(t, ir.MemRefType):
        arr = np.asarray(raw, dtype=_np_dtype(t.elem))
        return MemRefValue(t.elem, arr.shape, arr)
    raise InterpError(f"cannot build a runtime value of type {t}")


def _check_compatible(t: ir.IrType, v: RuntimeValue, where: str):
    ok = (
        (isinstance(t, ir.Float32Type) and isinstance(v, F32Value))
        or (isinstance(t, ir.Float64Type) and isinstance(v, F64Value))
        or (isinstance(t, ir.IntType) and isinstance(v, IntValue)
            and v.width == t.width)
        or (isinstance(t, ir.IndexType) and isinstance(v, IndexValue))
        or (isinstance(t, ir.TensorType) and isinstance(v, TensorValue)
            and v.data.ndim == t.rank and _np_dtype(t.elem) == v.data.dtype)
        or (isinstance(t, ir.MemRefType) and isinstance(v, MemRefValue)
            and v.data.ndim == t.rank and _np_dtype(t.elem) == v.data.dtype)
    )
    if not ok:
        raise InterpError(f"{where}: value {v!r} does not match type {t}")


# ---------------------------------------------------------------------------
# Execution


def _float_of(v: RuntimeValue) -> float:
    if isinstance(v, (F32Value, F64Value)):
        return v.value
    raise InterpError(f"expected a float value, got {v!r}")


def _int_of(v: RuntimeValue) -> int:
    if isinstance(v, (IntValue, IndexValue)):
        return v.value
    raise InterpError(f"expected an integer value, got {v!r}")


_CMP = {
    "eq": lambda a, b: a == b,
    "ne": lambda a, b: a != b,
    "slt": lambda a, b: a < b,
    "sle": lambda a, b: a <= b,
    "sgt": lambda a, b: a > b,
    "sge": lambda a, b: a >= b,
}


class _Machine:
    def __init__(self, module: ir.IrModule, step_limit: int, thread_ctx=None):
        self.module = module
        self.step_limit = step_limit
        self.steps = 0
        self.thread_ctx = thread_ctx  # dim -> (thread_id, block_id, block_dim)

    def tick(self):
        self.steps += 1
        if self.steps > self.step_limit:
            raise StepLimitExceeded(
                f"step budget of {self.step_limit} operations exceeded")

    def call(self, symbol: str, inputs):
        func = self.module.lookup_symbol(symbol)
        if func is None or func.name != "func.func":
            raise InterpError(f"no function @{symbol} in the module")
        ftype = func.attributes["function_type"].type
        if len(inputs) != len(ftype.inputs):
            raise InterpError(
                f"@{symbol} takes {len(ftype.inputs)} argument(s), got {len(inputs)}")
        for i, (t, v) in enumerate(zip(ftype.inputs, inputs)):
            _check_compatible(t, v, f"@{symbol} argument {i}")
        return self.run_region(func.regions[0], inputs)

    def run_region(self, region: ir.IrRegion, entry_args):
        env = {}
        block = region.entry
        args = list(entry_args)
        while True:
            for formal, actual in zip(block.arguments, args):
                env[formal] = actual
            jumped = False
            for op in block.operations:
                self.tick()
                outcome = self.execute(op, env)
                if outcome is None:
                    continue
                kind = outcome[0]
                if kind == "return":
                    return outcome[1]
                if kind == "jump":
                    _, block, args = outcome
                    jumped = True
                    break
            if not jumped:
                raise InterpError(f"^bb{block.id}: control fell off the block")

    def execute(self, op: ir.IrOperation, env):
        name = op.name
        get = lambda i: env[op.operands[i]]

        if name == "arith.constant":
            attr = op.attributes["value"]
            t = op.results[0].type
            if isinstance(attr, ir.FloatAttr):
                env[op.results[0]] = value_of_type(t, attr.value)
            elif isinstance(attr, ir.IntAttr):
                env[op.results[0]] = value_of_type(t, attr.value)
            else:
                raise InterpError(f"unsupported constant attribute {attr!r}")
            return None
        if name in ("arith.addf", "arith.subf", "arith.mulf", "arith.divf"):
            a, b = _float_of(get(0)), _float_of(get(1))
            t = op.results[0].type
            with np.errstate(all="ignore"):  # IEEE-754: inf/nan flow silently
                if isinstance(t, ir.Float32Type):
                    fa, fb = np.float32(a), np.float32(b)
                    r = {"arith.addf": fa + fb, "arith.subf": fa - fb,
                         "arith.mulf": fa * fb, "arith.divf": fa / fb}[name]
                    env[op.results[0]] = F32Value(float(np.float32(r)))
                else:
                    r = {"arith.addf": a + b, "arith.subf": a - b,
                         "arith.mulf": a * b,
                         "arith.divf": np.float64(a) / np.float64(b)}[name]
                    env[op.results[0]] = F64Value(float(r))
            return None
        if name == "arith.negf":
            t = op.results[0].type
            a = _float_of(get(0))
            if isinstance(t, ir.Float32Type):
                env[op.results[0]] = F32Value(float(np.float32(-np.float32(a))))
            else:
                env[op.results[0]] = F64Value(-a)
            return None
        if name == "math.exp":
            t = op.results[0].type
            a = _float_of(get(0))
            with np.errstate(all="ignore"):
                if isinstance(t, ir.Float32Type):
                    env[op.results[0]] = F32Value(float(np.exp(np.float32(a))))
                else:
                    env[op.results[0]] = F64Value(float(np.exp(np.float64(a))))
            return None
        if name in ("arith.addi", "arith.subi", "arith.muli"):
            a, b = _int_of(get(0)), _int_of(get(1))
            r = {"arith.addi": a + b, "arith.subi": a - b,
                 "arith.muli": a * b}[name]
            env[op.results[0]] = value_of_type(op.results[0].type, r)
            return None
        if name == "arith.cmpi":
            pred = op.attributes["predicate"].text
            if pred not in _CMP:
                raise InterpError(f"unknown cmpi predicate '{pred}'")
            r = _CMP[pred](_int_of(get(0)), _int_of(get(1)))
            env[op.results[0]] = IntValue(1, 1 if r else 0)
            return None
        if name == "arith.index_cast":
            env[op.results[0]] = value_of_type(op.results[0].type, _int_of(get(0)))
            return None
        if name in ("gpu.thread_id", "gpu.block_id", "gpu.block_dim"):
            if self.thread_ctx is None:
                raise MissingLaunchConfig(
                    f"{name} executed without a launch configuration")
            dim = op.attributes["dimension"].text
            tid, bid, bdim = self.thread_ctx[dim]
            value = {"gpu.thread_id": tid, "gpu.block_id": bid,
                     "gpu.block_dim": bdim}[name]
            env[op.results[0]] = IndexValue(value)
            return None
        if name == "memref.load":
            buf = get(0)
            if not isinstance(buf, MemRefValue):
                raise InterpError("memref.load target is not a memref value")
            idx = tuple(_int_of(get(i)) for i in range(1, len(op.operands)))
            self._bounds_check(buf, idx)
            return self._store_scalar(env, op.results[0], buf.data[idx])
        if name == "memref.store":
            buf = get(1)
            if not isinstance(buf, MemRefValue):
                raise InterpError("memref.store target is not a memref value")
            idx = tuple(_int_of(get(i)) for i in range(2, len(op.operands)))
            self._bounds_check(buf, idx)
            v = get(0)
            buf.data[idx] = v.value
            return None
        if name == "cf.br":
            s = op.successors[0]
            return ("jump", s.block, [env[v] for v in s.args])
        if name == "cf.cond_br":
            cond = get(0)
            if not isinstance(cond, IntValue) or cond.width != 1:
                raise InterpError("cf.cond_br condition is not an i1 value")
            s = op.successors[0] if cond.value else op.successors[1]
            return ("jump", s.block, [env[v] for v in s.args])
        if name in ("func.return", "linalg.yield"):
            return ("return", [env[v] for v in op.operands])
        if name == "func.call":
            callee = op.attributes["callee"].name
            results = self.call(callee, [env[v] for v in op.operands])
            for r, v in zip(op.results, results):
                env[r] = v
            return None
        if name == "linalg.generic":
            return self._generic(op, env)
        raise InterpError(f"unsupported operation '{name}'")

    def _store_scalar(self, env, result, raw):
        env[result] = value_of_type(result.type, raw)
        return None

    def _bounds_check(self, buf: MemRefValue, idx):
        for d, (i, extent) in enumerate(zip(idx, buf.data.shape)):
            if not 0 <= i < extent:
                where = ""
                if self.thread_ctx is not None:
                    where = f" (thread context {self.thread_ctx})"
                raise OutOfBounds(
                    f"index {i} out of bounds for dimension {d} of extent "
                    f"{extent}{where}")
        if len(idx) != buf.data.ndim:
            raise OutOfBounds(
                f"rank mismatch: {len(idx)} indices for rank {buf.data.ndim}")

    def _generic(self, op: ir.IrOperation, env):
        maps = [a for a in op.attributes["indexing_maps"].elements]
        operands = [env[v] for v in op.operands]
        if len(maps) != len(operands):
            raise InterpError("linalg.generic: one indexing map per operand required")
        n_axes = maps[0].n_axes if maps else 0

        extents = {}
        for which, (m, v) in enumerate(zip(maps, operands)):
            if not isinstance(v, TensorValue):
                raise InterpError("linalg.generic operands must be tensor values")
            if m.n_axes != n_axes or len(m.targets) != v.data.ndim:
                raise InterpError(
                    f"linalg.generic: map/operand rank mismatch on operand {which}")
            for d, axis in enumerate(m.targets):
                extent = v.data.shape[d]
                if axis in extents and extents[axis] != extent:
                    raise InterpError(
                        f"linalg.generic: inconsistent extent for axis d{axis}: "
                        f"{extents[axis]} vs {extent}")
                extents[axis] = extent
        missing = [a for a in range(n_axes) if a not in extents]
        if missing:
            raise InterpError(
                f"linalg.generic: no operand constrains axis d{missing[0]}")

        out = operands[-1]
        result = np.array(out.data, copy=True)
        region = op.regions[0]

        point = [0] * n_axes

        def gather(m, data):
            return tuple(point[axis] for axis in m.targets)

        def loop(axis):
            if axis == n_axes:
                args = []
                for m, v in zip(maps[:-1], operands[:-1]):
                    args.append(value_of_type(v.elem, v.data[gather(m, v)]))
                args.append(value_of_type(out.elem, result[gather(maps[-1], out)]))
                yielded = self.run_region(region, args)
                if len(yielded) != 1:
                    raise InterpError("linalg.generic body must yield one value")
                result[gather(maps[-1], out)] = yielded[0].value
                return
            for i in range(extents[axis]):
                point[axis] = i
                loop(axis + 1)

        loop(0)
        env[op.results[0]] = TensorValue(out.elem, result.shape, result)
        return None


def run_function(module: ir.IrModule, symbol: str, inputs,
                 step_limit: int = DEFAULT_STEP_LIMIT, thread_ctx=None):
    """Execute @symbol on ``inputs``; returns the list of result values."""
    machine = _Machine(module, step_limit, thread_ctx)
    return machine.call(symbol, list(inputs))


def run_kernel(module: ir.IrModule, symbol: str, launch: LaunchConfig, inputs,
               step_limit: int = DEFAULT_STEP_LIMIT, reverse: bool = False):
    """Run @symbol once per (block, thread) coordinate; returns ``inputs``.

    Coordinates are visited in lexicographic order over
    (block x,y,z, thread x,y,z); ``reverse`` visits them backwards.
    Buffer mutations through memref.store are visible in the returned
    inputs.
    """
    gx, gy, gz = launch.grid
    bx, by, bz = launch.block
    coords = [
        (tx, ty, tz, blkx, blky, blkz)
        for blkx in range(gx) for blky in range(gy) for blkz in range(gz)
        for tx in range(bx) for ty in range(by) for tz in range(bz)
    ]
    if reverse:
        coords = coords[::-1]
    inputs = list(inputs)
    for tx, ty, tz, blkx, blky, blkz in coords:
        thread_ctx = {
            "x": (tx, blkx, bx),
            "y": (ty, blky, by),
            "z": (tz, blkz, bz),
        }
        machine = _Machine(module, step_limit, thread_ctx)
        machine.call(symbol, inputs)
    return inputs
