"""Dialect spec loading, registration, and the typed builders."""

import pytest

from bridgegen import ir
from bridgegen.dialects import (
    ARITH_SPEC,
    BuildError,
    DialectRegistry,
    DialectSpecError,
    build_op,
    builtin_registry,
    load_dialect_spec,
    op_doc,
    register_dialect,
    serialize_dialect,
)
from bridgegen.ir import FloatAttr, IrModule, StringAttr, create_op, result


def fresh_block(module):
    region = module.new_region()
    create_op(module, "func.func", [], [],
              attributes={"sym_name": ir.SymbolAttr("f"),
                          "function_type": ir.TypeAttr(ir.FunctionType((), ()))},
              regions=[region])
    block = module.append_block(region, [])
    module.set_insertion(block)
    return block


def value(module, t=ir.F32, raw=1.0):
    if ir.is_float(t):
        attr = FloatAttr(raw, t)
    else:
        attr = ir.IntAttr(int(raw), t)
    op = create_op(module, "arith.constant", [], [t], {"value": attr})
    return result(op)


SAMPLE = """\
# one binary op
dialect demo

op addf "Adds two floats."
  operand lhs AnyFloat
  operand rhs same(0)
  result res same(0)
"""


class TestLoader:
    def test_round_trip_fixpoint(self):
        once = load_dialect_spec(SAMPLE)
        twice = load_dialect_spec(serialize_dialect(once))
        assert once.ops == twice.ops
        assert once.name == twice.name

    def test_definition_shape(self):
        defn = load_dialect_spec(SAMPLE)
        op = defn.ops["addf"]
        assert len(op.operands) == 2
        assert len(op.results) == 1
        assert op.doc == "Adds two floats."

    def test_empty_dialect(self):
        defn = load_dialect_spec("dialect nothing\n")
        assert defn.ops == {}

    def test_duplicate_op_name(self):
        text = SAMPLE + '\nop addf "Again."\n'
        with pytest.raises(DialectSpecError, match="duplicate op name"):
            load_dialect_spec(text)

    def test_dangling_same_reference(self):
        text = 'dialect demo\nop bad "x"\n  operand a same(0)\n'
        with pytest.raises(DialectSpecError, match="lower-indexed"):
            load_dialect_spec(text)

    def test_parse_error_carries_line_number(self):
        text = "dialect demo\nop broken docstring-missing-quotes\n"
        with pytest.raises(DialectSpecError) as info:
            load_dialect_spec(text)
        assert info.value.line == 2

    def test_docstring_preserved_verbatim(self):
        text = 'dialect d\nop o "  spaced   out docstring "\n'
        assert load_dialect_spec(text).ops["o"].doc == "  spaced   out docstring "

    def test_variadic_must_be_last(self):
        text = ('dialect d\nop o "x"\n  operand a variadic Any\n'
                '  operand b i64\n')
        with pytest.raises(DialectSpecError, match="must come last"):
            load_dialect_spec(text)

    def test_builtin_specs_fixpoint(self):
        once = load_dialect_spec(ARITH_SPEC)
        twice = load_dialect_spec(serialize_dialect(once))
        assert once.ops == twice.ops


class TestRegistry:
    def test_register_then_build(self):
        registry = register_dialect(DialectRegistry(), load_dialect_spec(SAMPLE))
        m = IrModule()
        fresh_block(m)
        a, b = value(m), value(m, raw=2.0)
        op = build_op(registry, m, "demo.addf", [a, b])
        assert result(op).type == ir.F32

    def test_register_twice_fails(self):
        registry = register_dialect(DialectRegistry(), load_dialect_spec(SAMPLE))
        with pytest.raises(BuildError, match="already registered"):
            register_dialect(registry, load_dialect_spec(SAMPLE))

    def test_unknown_op(self):
        m = IrModule()
        fresh_block(m)
        with pytest.raises(BuildError, match="unknown operation"):
            build_op(DialectRegistry(), m, "demo.addf", [])


class TestBuildOp:
    def test_result_type_resolved_from_operand(self):
        registry = builtin_registry()
        m = IrModule()
        fresh_block(m)
        a, b = value(m, ir.F64, 1.0), value(m, ir.F64, 2.0)
        op = build_op(registry, m, "arith.addf", [a, b])
        assert result(op).type == ir.F64

    def test_type_constraint_violation_names_operand(self):
        registry = builtin_registry()
        m = IrModule()
        fresh_block(m)
        a, b = value(m, ir.I64, 1), value(m, ir.I64, 2)
        with pytest.raises(BuildError, match="operand 'lhs'"):
            build_op(registry, m, "arith.addf", [a, b])

    def test_same_operand_mismatch(self):
        registry = builtin_registry()
        m = IrModule()
        fresh_block(m)
        a, b = value(m, ir.F32), value(m, ir.F64)
        with pytest.raises(BuildError, match="same\\(0\\)"):
            build_op(registry, m, "arith.addf", [a, b])

    def test_arity_mismatch(self):
        registry = builtin_registry()
        m = IrModule()
        fresh_block(m)
        with pytest.raises(BuildError, match="expected 2 operand"):
            build_op(registry, m, "arith.addf", [value(m)])

    def test_missing_required_attribute(self):
        registry = builtin_registry()
        m = IrModule()
        fresh_block(m)
        a, b = value(m, ir.I64, 1), value(m, ir.I64, 2)
        with pytest.raises(BuildError, match="missing required attribute"):
            build_op(registry, m, "arith.cmpi", [a, b])

    def test_cond_br_successors(self):
        registry = builtin_registry()
        m = IrModule()
        region = m.new_region()
        create_op(m, "func.func", [], [],
                  attributes={"sym_name": ir.SymbolAttr("f"),
                              "function_type": ir.TypeAttr(ir.FunctionType((), ()))},
                  regions=[region])
        entry = m.append_block(region, [])
        bb1 = m.append_block(region, [])
        bb2 = m.append_block(region, [])
        m.set_insertion(entry)
        cond = value(m, ir.IntType(1), 1)
        op = build_op(registry, m, "cf.cond_br", [cond],
                      successors=[(bb1, []), (bb2, [])])
        assert op.is_terminator and len(op.successors) == 2

    def test_build_time_validation_as_strict_as_verifier(self):
        # anything build_op accepts re-verifies clean per-op
        registry = builtin_registry()
        m = IrModule(registry=registry)
        fresh_block(m)
        a, b = value(m), value(m, raw=2.0)
        op = build_op(registry, m, "arith.addf", [a, b])
        assert registry.validate_op(op) == []

    def test_docstring_retrievable(self):
        registry = builtin_registry()
        assert "addition" in op_doc(registry, "arith.addf").lower()

    def test_elem_constraint_on_store(self):
        registry = builtin_registry()
        m = IrModule()
        fresh_block(m)
        v = value(m, ir.F32)
        buf_t = ir.MemRefType(ir.F64, (None,))
        buf = create_op(m, "dummy.buffer", [], [buf_t]).results[0]
        idx = value(m, ir.INDEX, 0)
        with pytest.raises(BuildError, match="elem\\(1\\)"):
            build_op(registry, m, "memref.store", [v, buf, idx])


class TestBuiltinRegistry:
    @pytest.mark.parametrize("name,n_operands,n_results", [
        ("arith.constant", 0, 1),
        ("arith.addf", 2, 1),
        ("arith.negf", 1, 1),
        ("arith.cmpi", 2, 1),
        ("arith.index_cast", 1, 1),
        ("math.exp", 1, 1),
        ("cf.br", 0, 0),
        ("cf.cond_br", 1, 0),
        ("func.func", 0, 0),
        ("gpu.thread_id", 0, 1),
        ("gpu.block_id", 0, 1),
        ("gpu.block_dim", 0, 1),
        ("memref.load", 1, 1),
        ("memref.store", 2, 0),
    ])
    def test_expected_surface(self, name, n_operands, n_results):
        registry = builtin_registry()
        defn = registry.lookup(name)
        assert defn is not None
        fixed_ops = [s for s in defn.operands if not s.variadic]
        fixed_res = [s for s in defn.results if not s.variadic]
        assert len(fixed_ops) == n_operands
        assert len(fixed_res) == n_results

    def test_math_exp_unary_float(self):
        registry = builtin_registry()
        m = IrModule()
        fresh_block(m)
        op = build_op(registry, m, "math.exp", [value(m)])
        assert result(op).type == ir.F32

    def test_gpu_thread_id_produces_index(self):
        registry = builtin_registry()
        m = IrModule()
        fresh_block(m)
        op = build_op(registry, m, "gpu.thread_id",
                      attributes={"dimension": StringAttr("x")})
        assert result(op).type == ir.INDEX

    def test_cmpi_shape(self):
        registry = builtin_registry()
        m = IrModule()
        fresh_block(m)
        a, b = value(m, ir.I64, 1), value(m, ir.I64, 2)
        op = build_op(registry, m, "arith.cmpi", [a, b],
                      attributes={"predicate": StringAttr("sge")})
        assert result(op).type == ir.IntType(1)
