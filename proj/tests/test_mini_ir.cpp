#include "doctest.h"

#include "helpers.hpp"

using namespace hew;
using namespace hewtest;

TEST_CASE("instruction_count basics") {
  Function f;
  f.id = "f";
  BasicBlock b1, b2;
  b1.instructions.push_back({Opcode::Br, TypeTag::voidty(), {}, false});
  b2.instructions.push_back({Opcode::Add, TypeTag::make_int(32), {}, false});
  b2.instructions.push_back({Opcode::Ret, TypeTag::voidty(), {}, false});
  f.blocks = {b1, b2};
  CHECK(instruction_count(f) == 3);

  Function decl;
  decl.id = "d";
  decl.attrs.is_declaration = true;
  CHECK_THROWS_AS(instruction_count(decl), Error);

  Function ten;
  ten.id = "t";
  BasicBlock five;
  for (int i = 0; i < 4; ++i)
    five.instructions.push_back({Opcode::Other, TypeTag::make_int(32), {}, false});
  five.instructions.push_back({Opcode::Ret, TypeTag::voidty(), {}, false});
  ten.blocks = {five, five};
  CHECK(instruction_count(ten) == 10);
}

TEST_CASE("weighted_size_cost per the size weight table") {
  CHECK(weighted_size_cost(make_fn("f", {Opcode::Br, Opcode::Load, Opcode::Add})) ==
        3 + 2 + 1 + 3); // + trailing ret (weight 3)
  CHECK(weighted_size_cost(make_fn("g", {})) == 3); // [ret] alone
  CHECK(weighted_size_cost(make_fn("h", {Opcode::Alloca, Opcode::Gep})) ==
        2 + 2 + 3);
  // Every size-scheme weight is >= 1.
  for (uint64_t seed = 1; seed <= 5; ++seed) {
    Program p = generate_program(seed);
    for (auto& [id, f] : p.functions)
      if (!f.attrs.is_declaration)
        CHECK(weighted_size_cost(f) >= instruction_count(f));
  }
}

TEST_CASE("perf_cost skips the zero-cost set and prices calls") {
  // [alloca, phi, add, ret], penalty 13 -> (2, false)
  Function f = make_fn("f", {Opcode::Alloca, Opcode::Phi, Opcode::Add});
  CHECK(perf_cost(f, 13).cost == 2);
  CHECK_FALSE(perf_cost(f, 13).has_vector);

  // [direct call, ret] penalty 13 -> 14; [indirect call, ret] -> 26+1.
  Program p = two_fn_program(make_fn_n("a", 0), make_fn_n("b", 0));
  add_call(p, "cs0", "a", "b");
  CHECK(perf_cost(p.function("a"), 13).cost == 13 + 1);
  Program q = two_fn_program(make_fn_n("a", 0), make_fn_n("b", 0));
  add_call(q, "cs0", "a", std::nullopt);
  CHECK(perf_cost(q.function("a"), 13).cost == 26 + 1);

  // Appending zero-cost opcodes never changes perf_cost.
  Function g = make_fn("g", {Opcode::Mul, Opcode::Load});
  int64_t before = perf_cost(g, 7).cost;
  for (Opcode op : {Opcode::Alloca, Opcode::Phi, Opcode::BitCast,
                    Opcode::PtrToInt, Opcode::IntToPtr})
    g.blocks[0].instructions.insert(g.blocks[0].instructions.begin(),
                                    {op, TypeTag::make_int(64), {}, false});
  CHECK(perf_cost(g, 7).cost == before);

  // has_vector is driven by result types of costed instructions.
  Function v = make_fn("v", {Opcode::FAdd});
  v.blocks[0].instructions[0].result_type =
      TypeTag::vector(TypeKind::Float, 32, 4);
  CHECK(perf_cost(v, 13).has_vector);
}

TEST_CASE("user_count recounts direct callsites") {
  Program p = two_fn_program(make_fn_n("a", 3), make_fn_n("b", 3));
  CHECK(user_count(p, p.function("b")) == 0);
  add_call(p, "cs0", "a", "b");
  CHECK(user_count(p, p.function("b")) == 1);
  p.functions.emplace("c", make_fn_n("c", 2));
  add_call(p, "cs1", "c", "b");
  add_call(p, "cs2", "c", "b");
  CHECK(user_count(p, p.function("b")) == 3);
  // Indirect calls never count as users.
  add_call(p, "cs3", "a", std::nullopt);
  CHECK(user_count(p, p.function("b")) == 3);
}

TEST_CASE("cast_class partition") {
  CHECK(cast_class(TypeTag::make_int(64), TypeTag::pointer()) ==
        CastClass::NoopPtrIntCast);
  CHECK(cast_class(TypeTag::pointer(), TypeTag::make_int(64)) ==
        CastClass::NoopPtrIntCast);
  CHECK(cast_class(TypeTag::make_int(32), TypeTag::make_int(32)) ==
        CastClass::Exact);
  CHECK(cast_class(TypeTag::make_int(32), TypeTag::make_int(64)) ==
        CastClass::NontrivialCast);
  CHECK(cast_class(TypeTag::make_float(32), TypeTag::make_float(64)) ==
        CastClass::NontrivialCast);
  CHECK(cast_class(TypeTag::make_int(32), TypeTag::make_float(32)) ==
        CastClass::NontrivialCast);
  CHECK(cast_class(TypeTag::pointer(), TypeTag::make_int(32)) ==
        CastClass::NontrivialCast);
  CHECK(cast_class(TypeTag::pointer(), TypeTag::pointer()) == CastClass::Exact);
}

TEST_CASE("program check rejects structural violations") {
  Program p = two_fn_program(make_fn_n("a", 1), make_fn_n("b", 1));
  add_call(p, "cs0", "a", "b");
  CHECK_NOTHROW(p.check());

  SUBCASE("dangling callee") {
    p.callsites.at("cs0").callee = "nope";
    CHECK_THROWS_AS(p.check(), Error);
  }
  SUBCASE("block out of range") {
    p.callsites.at("cs0").block = 9;
    CHECK_THROWS_AS(p.check(), Error);
  }
  SUBCASE("no_inline and always_inline conflict") {
    p.functions.at("b").attrs.no_inline = true;
    p.functions.at("b").attrs.always_inline = true;
    CHECK_THROWS_AS(p.check(), Error);
  }
  SUBCASE("declaration with body") {
    p.functions.at("b").attrs.is_declaration = true;
    CHECK_THROWS_AS(p.check(), Error);
  }
  SUBCASE("indirect flag mismatch") {
    // The call instruction sits just before the terminator.
    auto& instrs = p.functions.at("a").blocks[0].instructions;
    instrs[instrs.size() - 2].indirect = true;
    CHECK_THROWS_AS(p.check(), Error);
  }
}

TEST_CASE("json round trip preserves programs") {
  for (uint64_t seed : {1ull, 42ull, 999ull}) {
    Program p = generate_program(seed);
    p.check();
    Program q = program_from_json(program_to_json(p));
    q.check();
    CHECK(program_to_json(p) == program_to_json(q));
    CHECK(p.functions.size() == q.functions.size());
    CHECK(p.callsites.size() == q.callsites.size());
    CHECK(p.roots == q.roots);
  }
  CHECK_THROWS_AS(program_from_json("{not json"), Error);
}

TEST_CASE("generator is deterministic and produces valid programs") {
  Program a = generate_program(7);
  Program b = generate_program(7);
  CHECK(program_to_json(a) == program_to_json(b));
  CHECK(program_to_json(a) != program_to_json(generate_program(8)));
  for (uint64_t seed = 0; seed < 20; ++seed) generate_program(seed).check();
}
