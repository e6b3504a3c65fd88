"""Reference interpreter: scalar ops, control flow, loop nests, kernels."""

import math
import random

import numpy as np
import pytest

from bridgegen import einsum, fir, interp, ir
from bridgegen.interp import (
    F32Value,
    F64Value,
    IndexValue,
    IntValue,
    InterpError,
    LaunchConfig,
    MemRefValue,
    MissingLaunchConfig,
    OutOfBounds,
    StepLimitExceeded,
    run_function,
    run_kernel,
)
from conftest import (
    MAX_FIR,
    SIGMOID_FIR,
    VADD_FIR,
    VADD_TYPES,
    einsum_bruteforce,
    run_pipeline,
    tensor_value,
)


@pytest.fixture
def sigmoid(registry):
    return run_pipeline(registry, SIGMOID_FIR, "sigmoid", [fir.F32])


@pytest.fixture
def max_module(registry):
    return run_pipeline(registry, MAX_FIR, "max", [fir.I64, fir.I64])


@pytest.fixture
def vadd(registry):
    return run_pipeline(registry, VADD_FIR, "vadd", VADD_TYPES)


class TestScalars:
    def test_sigmoid_at_zero_exact(self, sigmoid):
        [out] = run_function(sigmoid, "sigmoid", [F32Value(0.0)])
        assert out.value == 0.5

    def test_sigmoid_at_two(self, sigmoid):
        # independent scalar oracle for 1/(1+e^-2)
        oracle = 1.0 / (1.0 + math.exp(-2.0))
        [out] = run_function(sigmoid, "sigmoid", [F32Value(2.0)])
        assert abs(out.value - oracle) < 1e-6

    def test_f32_arithmetic_is_single_precision(self, sigmoid):
        [out] = run_function(sigmoid, "sigmoid", [F32Value(2.0)])
        expect = np.float32(1.0) / (np.float32(1.0)
                                    + np.exp(np.float32(-np.float32(2.0))))
        assert out.value == float(np.float32(expect))

    def test_max_branches(self, max_module):
        for a, b in [(3, 7), (7, 3), (5, 5), (-2, 4)]:
            [out] = run_function(max_module, "max",
                                 [IntValue(64, a), IntValue(64, b)])
            assert out.value == max(a, b)

    def test_cmpi_truth_table(self, registry):
        import operator
        preds = {"==": operator.eq, "!=": operator.ne, "<": operator.lt,
                 "<=": operator.le, ">": operator.gt, ">=": operator.ge}
        for name, py in preds.items():
            text = (f"fn f(_1: i64, _2: i64)\n1:\n"
                    f"  %1 = invoke {name}(_1, _2) :: i1\n  return %1\n")
            module = run_pipeline(registry, text, "f", [fir.I64, fir.I64])
            for a in range(-2, 3):
                for b in range(-2, 3):
                    [out] = run_function(module, "f",
                                         [IntValue(64, a), IntValue(64, b)])
                    assert out.value == int(py(a, b)), (name, a, b)

    def test_int_width_wrapping(self, registry):
        text = "fn f(_1: i64, _2: i64)\n1:\n  %1 = invoke *(_1, _2) :: i64\n  return %1\n"
        module = run_pipeline(registry, text, "f", [fir.I64, fir.I64])
        big = 2 ** 62
        [out] = run_function(module, "f", [IntValue(64, big), IntValue(64, 4)])
        assert out.value == ((big * 4 + 2 ** 63) % 2 ** 64) - 2 ** 63

    def test_input_arity_checked(self, sigmoid):
        with pytest.raises(InterpError, match="takes 1 argument"):
            run_function(sigmoid, "sigmoid", [])

    def test_input_type_checked(self, sigmoid):
        with pytest.raises(InterpError, match="does not match type"):
            run_function(sigmoid, "sigmoid", [F64Value(1.0)])

    def test_unknown_symbol(self, sigmoid):
        with pytest.raises(InterpError, match="no function"):
            run_function(sigmoid, "nope", [])

    def test_determinism(self, max_module):
        runs = [run_function(max_module, "max",
                             [IntValue(64, 3), IntValue(64, 9)])[0].value
                for _ in range(3)]
        assert runs == [9, 9, 9]

    def test_inlined_branchy_callee_end_to_end(self, registry):
        text = """\
fn f(_1: i64, _2: i64)
1:
  %1 = invoke >=(_1, _2) :: i1
  goto #3 ifnot %1
2:
  %2 = invoke g(_1) :: i64
  goto #4
3:
  nothing
4:
  %6 = phi (#2 => %2, #3 => _2) :: i64
  return %6

fn g(_1: i64)
1:
  %1 = invoke +(_1, 1) :: i64
  return %1
"""
        module = run_pipeline(registry, text, "f", [fir.I64, fir.I64])
        for a, b in [(5, 2), (2, 5), (3, 3)]:
            [out] = run_function(module, "f",
                                 [IntValue(64, a), IntValue(64, b)])
            assert out.value == (a + 1 if a >= b else b)

    def test_loop_with_carried_phi_values(self, registry):
        # phi incomings may reference later statements on the back edge
        text = """\
fn sumto(_1: i64)
1:
  goto #2
2:
  %2 = phi (#1 => 0, #3 => %5) :: i64
  %3 = phi (#1 => _1, #3 => %6) :: i64
  %4 = invoke >(%3, 0) :: i1
  goto #4 ifnot %4
3:
  %5 = invoke +(%2, %3) :: i64
  %6 = invoke -(%3, 1) :: i64
  goto #2
4:
  return %2
"""
        module = run_pipeline(registry, text, "sumto", [fir.I64])
        assert ir.verify_module(module).ok
        for n in (0, 1, 5, 10):
            [out] = run_function(module, "sumto", [IntValue(64, n)])
            assert out.value == n * (n + 1) // 2

    def test_index_cast(self, registry):
        from bridgegen.dialects import build_op

        module = ir.IrModule(registry=registry.dialects)
        region = module.new_region()
        build_op(registry.dialects, module, "func.func",
                 attributes={"sym_name": ir.SymbolAttr("cast"),
                             "function_type": ir.TypeAttr(
                                 ir.FunctionType((ir.I64,), (ir.INDEX,)))},
                 regions=[region])
        entry = module.append_block(region, [ir.I64])
        module.set_insertion(entry)
        cast = build_op(registry.dialects, module, "arith.index_cast",
                        [entry.arguments[0]], result_types=[ir.INDEX])
        build_op(registry.dialects, module, "func.return", [cast.results[0]])
        assert ir.verify_module(module).ok
        [out] = run_function(module, "cast", [IntValue(64, 42)])
        assert isinstance(out, IndexValue) and out.value == 42

    def test_func_call(self, registry, sigmoid):
        from bridgegen.dialects import build_op

        module = sigmoid
        region = module.new_region()
        module.set_insertion(module.body.blocks[0])
        build_op(registry.dialects, module, "func.func",
                 attributes={"sym_name": ir.SymbolAttr("wrapper"),
                             "function_type": ir.TypeAttr(
                                 ir.FunctionType((ir.F32,), (ir.F32,)))},
                 regions=[region])
        entry = module.append_block(region, [ir.F32])
        module.set_insertion(entry)
        call = build_op(registry.dialects, module, "func.call",
                        [entry.arguments[0]],
                        attributes={"callee": ir.SymbolAttr("sigmoid")},
                        result_types=[ir.F32])
        build_op(registry.dialects, module, "func.return", [call.results[0]])
        assert ir.verify_module(module).ok
        assert "func.call @sigmoid(%arg0) : (f32) -> f32" in ir.print_module(module)
        [direct] = run_function(module, "sigmoid", [F32Value(2.0)])
        [wrapped] = run_function(module, "wrapper", [F32Value(2.0)])
        assert wrapped.value == direct.value


class TestStepLimit:
    def test_infinite_loop_hits_limit(self, registry):
        text = "fn f(_1: i64)\n1:\n  goto #2\n2:\n  goto #2\n"
        module = run_pipeline(registry, text, "f", [fir.I64])
        with pytest.raises(StepLimitExceeded):
            run_function(module, "f", [IntValue(64, 0)], step_limit=100)

    def test_limit_not_hit_for_short_programs(self, sigmoid):
        run_function(sigmoid, "sigmoid", [F32Value(1.0)], step_limit=10)


class TestGeneric:
    def test_matmul_against_triple_loop(self, registry):
        spec = einsum.parse_einsum("(i,k),(k,j)->(i,j)")
        module = einsum.build_einsum_function(registry, spec)
        rng = np.random.default_rng(11)
        a = rng.random((4, 3)).astype(np.float32)
        b = rng.random((3, 5)).astype(np.float32)
        c = np.zeros((4, 5), dtype=np.float32)
        [out] = run_function(module, "einsum",
                             [tensor_value(a), tensor_value(b), tensor_value(c)])
        oracle = np.zeros((4, 5))
        for i in range(4):
            for j in range(5):
                for k in range(3):
                    oracle[i, j] += float(a[i, k]) * float(b[k, j])
        assert np.allclose(out.data, oracle, rtol=1e-5)

    def test_inconsistent_extents_rejected(self, registry):
        spec = einsum.parse_einsum("(i,k),(k,j)->(i,j)")
        module = einsum.build_einsum_function(registry, spec)
        a = np.zeros((4, 3), dtype=np.float32)
        b = np.zeros((2, 5), dtype=np.float32)  # k mismatch: 3 vs 2
        c = np.zeros((4, 5), dtype=np.float32)
        with pytest.raises(InterpError, match="inconsistent extent"):
            run_function(module, "einsum",
                         [tensor_value(a), tensor_value(b), tensor_value(c)])

    def test_output_accumulates_from_initial(self, registry):
        spec = einsum.parse_einsum("(i,k),(k,j)->(i,j)")
        module = einsum.build_einsum_function(registry, spec)
        a = np.ones((2, 2), dtype=np.float32)
        b = np.ones((2, 2), dtype=np.float32)
        c = np.full((2, 2), 10.0, dtype=np.float32)
        [out] = run_function(module, "einsum",
                             [tensor_value(a), tensor_value(b), tensor_value(c)])
        assert np.allclose(out.data, 12.0)
        assert np.allclose(c, 10.0)  # tensor input untouched


class TestKernels:
    def vadd_buffers(self):
        a = np.arange(1, 9, dtype=np.float32)
        b = np.arange(10, 90, 10, dtype=np.float32)
        c = np.zeros(8, dtype=np.float32)
        return [MemRefValue(ir.F32, (8,), x) for x in (a, b, c)]

    def test_vadd(self, vadd):
        bufs = self.vadd_buffers()
        out = run_kernel(vadd, "vadd", LaunchConfig((2, 1, 1), (4, 1, 1)), bufs)
        assert np.array_equal(out[2].data,
                              np.array([11, 22, 33, 44, 55, 66, 77, 88],
                                       dtype=np.float32))

    def test_order_independent_for_disjoint_writes(self, vadd):
        forward = self.vadd_buffers()
        run_kernel(vadd, "vadd", LaunchConfig((2, 1, 1), (4, 1, 1)), forward)
        backward = self.vadd_buffers()
        run_kernel(vadd, "vadd", LaunchConfig((2, 1, 1), (4, 1, 1)), backward,
                   reverse=True)
        assert np.array_equal(forward[2].data, backward[2].data)

    def test_excess_threads_out_of_bounds(self, vadd):
        # first excess coordinate is thread 0 of block 2 -> index 8
        bufs = self.vadd_buffers()
        with pytest.raises(OutOfBounds, match="index 8 out of bounds"):
            run_kernel(vadd, "vadd", LaunchConfig((3, 1, 1), (4, 1, 1)), bufs)

    def test_gpu_op_without_launch(self, vadd):
        bufs = self.vadd_buffers()
        with pytest.raises(MissingLaunchConfig):
            run_function(vadd, "vadd", bufs)

    def test_launch_extents_validated(self):
        with pytest.raises(InterpError, match=">= 1"):
            LaunchConfig((0, 1, 1), (1, 1, 1))

    def test_mutations_visible_in_inputs(self, vadd):
        bufs = self.vadd_buffers()
        returned = run_kernel(vadd, "vadd", LaunchConfig((2, 1, 1), (4, 1, 1)),
                              bufs)
        assert returned[2] is bufs[2]
        assert bufs[2].data[0] == 11.0


class TestGenericPropertySuite:
    """generic-op semantics equal brute-force loop-nest evaluation."""

    def test_random_specs(self, registry):
        rng = random.Random(5)
        nrng = np.random.default_rng(5)
        for _ in range(12):
            spec = self.random_spec(rng)
            module = einsum.build_einsum_function(registry, spec)
            extents = {name: rng.randint(1, 4) for name in spec.axes}
            inputs = [
                nrng.random(tuple(extents[n] for n in tup)).astype(np.float32)
                for tup in spec.inputs
            ]
            out = np.zeros(tuple(extents[n] for n in spec.output),
                           dtype=np.float32)
            values = [tensor_value(x) for x in inputs] + [tensor_value(out)]
            [got] = run_function(module, "einsum", values)
            want = einsum_bruteforce(spec, inputs, out)
            assert np.allclose(got.data, want, rtol=1e-5, atol=1e-6), spec

    @staticmethod
    def random_spec(rng):
        letters = ["i", "j", "k", "l"]
        while True:
            n_inputs = rng.randint(1, 3)
            inputs = []
            for _ in range(n_inputs):
                rank = rng.randint(1, 3)
                inputs.append(tuple(rng.sample(letters, rank)))
            used = [n for tup in inputs for n in tup]
            out_rank = rng.randint(0, min(3, len(set(used))))
            output = tuple(rng.sample(sorted(set(used)), out_rank))
            text = ",".join("(" + ",".join(t) + ")" for t in inputs)
            text += "->(" + ",".join(output) + ")"
            try:
                return einsum.parse_einsum(text)
            except einsum.EinsumError:
                continue
