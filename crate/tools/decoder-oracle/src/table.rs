//! Assembly templates: every decodable mnemonic, three operand variants each.
//!
//! Operands are chosen so assemblers and disassemblers keep the canonical
//! spelling: no `x0`/`ra` in positions that trigger aliases (`nop`, `mv`,
//! `ret`, `j`, `beqz`, `csrr`, ...), no `imm` values with alias meanings
//! (`sltiu _, _, 1` is `seqz`, `xori _, _, -1` is `not`, `andi _, _, 255`
//! is `zext.b`), and distinct source registers where `fsgnj*` would fold to
//! `fmv`/`fneg`/`fabs`. Branch/jump targets use a local label emitted right
//! after the instruction.

type Entry = (&'static str, &'static [&'static str]);

/// 32-bit instructions, assembled with compression disabled.
pub const WIDE: &[Entry] = &[
    // ----- RV64I -----
    ("lui", &["lui t0, 0x12345", "lui a0, 1", "lui s2, 0xfffff"]),
    ("auipc", &["auipc t0, 0x1000", "auipc a1, 2", "auipc s3, 0xfffff"]),
    ("jal", &["jal t0, 1f", "jal s0, 1f", "jal a3, 1f"]),
    ("jalr", &["jalr t0, 8(t1)", "jalr s1, 4(a0)", "jalr a0, -4(s2)"]),
    ("beq", &["beq t0, t1, 1f", "beq a0, a1, 1f", "beq s2, s3, 1f"]),
    ("bne", &["bne t2, t3, 1f", "bne a2, a3, 1f", "bne s4, s5, 1f"]),
    ("blt", &["blt t0, t4, 1f", "blt a4, a5, 1f", "blt s6, s7, 1f"]),
    ("bge", &["bge t1, t5, 1f", "bge a6, a7, 1f", "bge s8, s9, 1f"]),
    ("bltu", &["bltu t2, t6, 1f", "bltu a0, a2, 1f", "bltu s10, s11, 1f"]),
    ("bgeu", &["bgeu t3, t0, 1f", "bgeu a1, a3, 1f", "bgeu s0, s2, 1f"]),
    ("lb", &["lb t0, 8(t1)", "lb a0, 0(s0)", "lb s4, -16(a1)"]),
    ("lh", &["lh t1, 2(t2)", "lh a1, 0(s1)", "lh s5, -2(a2)"]),
    ("lw", &["lw t2, 4(t3)", "lw a2, 0(s2)", "lw s6, -4(a3)"]),
    ("ld", &["ld t3, 8(t4)", "ld a3, 0(s3)", "ld s7, -8(a4)"]),
    ("lbu", &["lbu t4, 1(t5)", "lbu a4, 0(s4)", "lbu s8, -1(a5)"]),
    ("lhu", &["lhu t5, 2(t6)", "lhu a5, 0(s5)", "lhu s9, -2(a6)"]),
    ("lwu", &["lwu t6, 4(t0)", "lwu a6, 0(s6)", "lwu s10, -4(a7)"]),
    ("sb", &["sb t0, 8(t1)", "sb a0, 0(s0)", "sb s4, -16(a1)"]),
    ("sh", &["sh t1, 2(t2)", "sh a1, 0(s1)", "sh s5, -2(a2)"]),
    ("sw", &["sw t2, 4(t3)", "sw a2, 0(s2)", "sw s6, -4(a3)"]),
    ("sd", &["sd t3, 8(t4)", "sd a3, 0(s3)", "sd s7, -8(a4)"]),
    ("addi", &["addi t0, t1, 42", "addi a0, s0, -7", "addi s4, a1, 2047"]),
    ("slti", &["slti t1, t2, 9", "slti a1, s1, -12", "slti s5, a2, 100"]),
    ("sltiu", &["sltiu t2, t3, 9", "sltiu a2, s2, 42", "sltiu s6, a3, 2000"]),
    ("xori", &["xori t3, t4, 42", "xori a3, s3, 9", "xori s7, a4, -2048"]),
    ("ori", &["ori t4, t5, 42", "ori a4, s4, -9", "ori s8, a5, 7"]),
    ("andi", &["andi t5, t6, 42", "andi a5, s5, -9", "andi s9, a6, 7"]),
    ("slli", &["slli t6, t0, 13", "slli a6, s6, 1", "slli s10, a7, 63"]),
    ("srli", &["srli t0, t1, 9", "srli a7, s7, 1", "srli s11, a0, 63"]),
    ("srai", &["srai t1, t2, 3", "srai a0, s8, 1", "srai s0, a1, 63"]),
    ("addiw", &["addiw t2, t3, 5", "addiw a1, s9, -3", "addiw s1, a2, 100"]),
    ("slliw", &["slliw t3, t4, 7", "slliw a2, s10, 1", "slliw s2, a3, 31"]),
    ("srliw", &["srliw t4, t5, 9", "srliw a3, s11, 1", "srliw s3, a4, 31"]),
    ("sraiw", &["sraiw t5, t6, 3", "sraiw a4, s0, 1", "sraiw s4, a5, 31"]),
    ("add", &["add t0, t1, t2", "add a0, s0, s1", "add a5, t3, t4"]),
    ("sub", &["sub t1, t2, t3", "sub a1, s2, s3", "sub a6, t5, t6"]),
    ("sll", &["sll t2, t3, t4", "sll a2, s4, s5", "sll a7, t0, t1"]),
    ("slt", &["slt t3, t4, t5", "slt a3, s6, s7", "slt s0, t2, t6"]),
    ("sltu", &["sltu t4, t5, t6", "sltu a4, s8, s9", "sltu s1, t0, t3"]),
    ("xor", &["xor t5, t6, t0", "xor a5, s10, s11", "xor s2, t1, t4"]),
    ("srl", &["srl t6, t0, t1", "srl a6, s0, s2", "srl s3, t2, t5"]),
    ("sra", &["sra t0, t1, t3", "sra a7, s1, s3", "sra s4, t4, t6"]),
    ("or", &["or t1, t2, t4", "or a0, s2, s4", "or s5, t5, t0"]),
    ("and", &["and t2, t3, t5", "and a1, s3, s5", "and s6, t6, t1"]),
    ("addw", &["addw t3, t4, t6", "addw a2, s4, s6", "addw s7, t0, t2"]),
    ("subw", &["subw t4, t5, t0", "subw a3, s5, s7", "subw s8, t1, t3"]),
    ("sllw", &["sllw t5, t6, t1", "sllw a4, s6, s8", "sllw s9, t2, t4"]),
    ("srlw", &["srlw t6, t0, t2", "srlw a5, s7, s9", "srlw s10, t3, t5"]),
    ("sraw", &["sraw t0, t1, t4", "sraw a6, s8, s10", "sraw s11, t4, t6"]),
    ("fence", &["fence", "fence rw, rw", "fence iorw, iorw"]),
    ("fence.i", &["fence.i", "fence.i", "fence.i"]),
    ("ecall", &["ecall", "ecall", "ecall"]),
    ("ebreak", &["ebreak", "ebreak", "ebreak"]),
    ("csrrw", &["csrrw t0, 0x340, t1", "csrrw a0, 0x305, s0", "csrrw s5, 0x105, a2"]),
    ("csrrs", &["csrrs t1, 0x340, t2", "csrrs a1, 0x305, s1", "csrrs s6, 0x106, a3"]),
    ("csrrc", &["csrrc t2, 0x340, t3", "csrrc a2, 0x305, s2", "csrrc s7, 0x140, a4"]),
    ("csrrwi", &["csrrwi t3, 0x340, 5", "csrrwi a3, 0x305, 1", "csrrwi s8, 0x105, 31"]),
    ("csrrsi", &["csrrsi t4, 0x340, 5", "csrrsi a4, 0x305, 1", "csrrsi s9, 0x106, 31"]),
    ("csrrci", &["csrrci t5, 0x340, 5", "csrrci a5, 0x305, 1", "csrrci s10, 0x140, 31"]),
    // ----- M -----
    ("mul", &["mul t0, t1, t2", "mul a0, s0, s1", "mul s4, a5, a6"]),
    ("mulh", &["mulh t1, t2, t3", "mulh a1, s1, s2", "mulh s5, a6, a7"]),
    ("mulhsu", &["mulhsu t2, t3, t4", "mulhsu a2, s2, s3", "mulhsu s6, a7, a0"]),
    ("mulhu", &["mulhu t3, t4, t5", "mulhu a3, s3, s4", "mulhu s7, a0, a1"]),
    ("div", &["div t4, t5, t6", "div a4, s4, s5", "div s8, a1, a2"]),
    ("divu", &["divu t5, t6, t0", "divu a5, s5, s6", "divu s9, a2, a3"]),
    ("rem", &["rem t6, t0, t1", "rem a6, s6, s7", "rem s10, a3, a4"]),
    ("remu", &["remu t0, t2, t4", "remu a7, s7, s8", "remu s11, a4, a5"]),
    ("mulw", &["mulw t1, t3, t5", "mulw a0, s8, s9", "mulw s0, a5, a7"]),
    ("divw", &["divw t2, t4, t6", "divw a1, s9, s10", "divw s1, a6, a0"]),
    ("divuw", &["divuw t3, t5, t0", "divuw a2, s10, s11", "divuw s2, a7, a1"]),
    ("remw", &["remw t4, t6, t1", "remw a3, s11, s0", "remw s3, a0, a2"]),
    ("remuw", &["remuw t5, t0, t2", "remuw a4, s0, s2", "remuw s4, a1, a3"]),
    // ----- A -----
    ("lr.w", &["lr.w t0, (t1)", "lr.w a0, (s0)", "lr.w s2, (a1)"]),
    ("sc.w", &["sc.w t1, t2, (t3)", "sc.w a1, a2, (s1)", "sc.w s3, s4, (a3)"]),
    ("amoswap.w", &["amoswap.w t2, t3, (t4)", "amoswap.w a2, a3, (s2)", "amoswap.w s5, s6, (a4)"]),
    ("amoadd.w", &["amoadd.w t3, t4, (t5)", "amoadd.w a3, a4, (s3)", "amoadd.w s7, s8, (a5)"]),
    ("amoxor.w", &["amoxor.w t4, t5, (t6)", "amoxor.w a4, a5, (s4)", "amoxor.w s9, s10, (a6)"]),
    ("amoand.w", &["amoand.w t5, t6, (t0)", "amoand.w a5, a6, (s5)", "amoand.w s11, s0, (a7)"]),
    ("amoor.w", &["amoor.w t6, t0, (t1)", "amoor.w a6, a7, (s6)", "amoor.w s0, s1, (a0)"]),
    ("amomin.w", &["amomin.w t0, t1, (t2)", "amomin.w a7, a0, (s7)", "amomin.w s1, s2, (a1)"]),
    ("amomax.w", &["amomax.w t1, t2, (t3)", "amomax.w a0, a1, (s8)", "amomax.w s2, s3, (a2)"]),
    ("amominu.w", &["amominu.w t2, t3, (t4)", "amominu.w a1, a2, (s9)", "amominu.w s3, s4, (a3)"]),
    ("amomaxu.w", &["amomaxu.w t3, t4, (t5)", "amomaxu.w a2, a3, (s10)", "amomaxu.w s4, s5, (a4)"]),
    ("lr.d", &["lr.d t4, (t5)", "lr.d a3, (s11)", "lr.d s5, (a5)"]),
    ("sc.d", &["sc.d t5, t6, (t0)", "sc.d a4, a5, (s0)", "sc.d s6, s7, (a6)"]),
    ("amoswap.d", &["amoswap.d t6, t0, (t1)", "amoswap.d a5, a6, (s1)", "amoswap.d s8, s9, (a7)"]),
    ("amoadd.d", &["amoadd.d t0, t1, (t2)", "amoadd.d a6, a7, (s2)", "amoadd.d s10, s11, (a0)"]),
    ("amoxor.d", &["amoxor.d t1, t2, (t3)", "amoxor.d a7, a0, (s3)", "amoxor.d s0, s2, (a1)"]),
    ("amoand.d", &["amoand.d t2, t3, (t4)", "amoand.d a0, a1, (s4)", "amoand.d s1, s3, (a2)"]),
    ("amoor.d", &["amoor.d t3, t4, (t5)", "amoor.d a1, a2, (s5)", "amoor.d s2, s4, (a3)"]),
    ("amomin.d", &["amomin.d t4, t5, (t6)", "amomin.d a2, a3, (s6)", "amomin.d s3, s5, (a4)"]),
    ("amomax.d", &["amomax.d t5, t6, (t0)", "amomax.d a3, a4, (s7)", "amomax.d s4, s6, (a5)"]),
    ("amominu.d", &["amominu.d t6, t0, (t1)", "amominu.d a4, a5, (s8)", "amominu.d s5, s7, (a6)"]),
    ("amomaxu.d", &["amomaxu.d t0, t2, (t4)", "amomaxu.d a5, a6, (s9)", "amomaxu.d s6, s8, (a7)"]),
    // ----- F -----
    ("flw", &["flw ft0, 8(t1)", "flw fa0, 0(s0)", "flw fs1, -4(a1)"]),
    ("fsw", &["fsw ft1, 8(t2)", "fsw fa1, 0(s1)", "fsw fs2, -4(a2)"]),
    ("fmadd.s", &["fmadd.s ft0, ft1, ft2, ft3", "fmadd.s fa0, fa1, fa2, fa3", "fmadd.s fs0, fs1, ft4, fa4"]),
    ("fmsub.s", &["fmsub.s ft1, ft2, ft3, ft4", "fmsub.s fa1, fa2, fa3, fa4", "fmsub.s fs1, fs2, ft5, fa5"]),
    ("fnmsub.s", &["fnmsub.s ft2, ft3, ft4, ft5", "fnmsub.s fa2, fa3, fa4, fa5", "fnmsub.s fs2, fs3, ft6, fa6"]),
    ("fnmadd.s", &["fnmadd.s ft3, ft4, ft5, ft6", "fnmadd.s fa3, fa4, fa5, fa6", "fnmadd.s fs3, fs4, ft7, fa7"]),
    ("fadd.s", &["fadd.s ft0, ft1, ft2", "fadd.s fa0, fa1, fa2", "fadd.s fs4, fs5, ft8"]),
    ("fsub.s", &["fsub.s ft1, ft2, ft3", "fsub.s fa1, fa2, fa3", "fsub.s fs5, fs6, ft9"]),
    ("fmul.s", &["fmul.s ft2, ft3, ft4", "fmul.s fa2, fa3, fa4", "fmul.s fs6, fs7, ft10"]),
    ("fdiv.s", &["fdiv.s ft3, ft4, ft5", "fdiv.s fa3, fa4, fa5", "fdiv.s fs7, fs8, ft11"]),
    ("fsqrt.s", &["fsqrt.s ft4, ft5", "fsqrt.s fa4, fa5", "fsqrt.s fs8, fs9"]),
    ("fsgnj.s", &["fsgnj.s ft5, ft6, ft7", "fsgnj.s fa5, fa6, fa7", "fsgnj.s fs9, fs10, fs11"]),
    ("fsgnjn.s", &["fsgnjn.s ft6, ft7, ft8", "fsgnjn.s fa6, fa7, fa0", "fsgnjn.s fs10, fs11, fs0"]),
    ("fsgnjx.s", &["fsgnjx.s ft7, ft8, ft9", "fsgnjx.s fa7, fa0, fa1", "fsgnjx.s fs11, fs0, fs1"]),
    ("fmin.s", &["fmin.s ft8, ft9, ft10", "fmin.s fa0, fa2, fa4", "fmin.s fs0, fs2, fs4"]),
    ("fmax.s", &["fmax.s ft9, ft10, ft11", "fmax.s fa1, fa3, fa5", "fmax.s fs1, fs3, fs5"]),
    ("fcvt.w.s", &["fcvt.w.s t0, ft1", "fcvt.w.s a0, fa0", "fcvt.w.s s2, fs2"]),
    ("fcvt.wu.s", &["fcvt.wu.s t1, ft2", "fcvt.wu.s a1, fa1", "fcvt.wu.s s3, fs3"]),
    ("fcvt.l.s", &["fcvt.l.s t2, ft3", "fcvt.l.s a2, fa2", "fcvt.l.s s4, fs4"]),
    ("fcvt.lu.s", &["fcvt.lu.s t3, ft4", "fcvt.lu.s a3, fa3", "fcvt.lu.s s5, fs5"]),
    ("fmv.x.w", &["fmv.x.w t4, ft5", "fmv.x.w a4, fa4", "fmv.x.w s6, fs6"]),
    ("feq.s", &["feq.s t5, ft6, ft7", "feq.s a5, fa5, fa6", "feq.s s7, fs7, fs8"]),
    ("flt.s", &["flt.s t6, ft7, ft8", "flt.s a6, fa6, fa7", "flt.s s8, fs8, fs9"]),
    ("fle.s", &["fle.s t0, ft8, ft9", "fle.s a7, fa7, fa0", "fle.s s9, fs9, fs10"]),
    ("fclass.s", &["fclass.s t1, ft9", "fclass.s a0, fa1", "fclass.s s10, fs10"]),
    ("fcvt.s.w", &["fcvt.s.w ft0, t1", "fcvt.s.w fa0, a1", "fcvt.s.w fs0, s1"]),
    ("fcvt.s.wu", &["fcvt.s.wu ft1, t2", "fcvt.s.wu fa1, a2", "fcvt.s.wu fs1, s2"]),
    ("fcvt.s.l", &["fcvt.s.l ft2, t3", "fcvt.s.l fa2, a3", "fcvt.s.l fs2, s3"]),
    ("fcvt.s.lu", &["fcvt.s.lu ft3, t4", "fcvt.s.lu fa3, a4", "fcvt.s.lu fs3, s4"]),
    ("fmv.w.x", &["fmv.w.x ft4, t5", "fmv.w.x fa4, a5", "fmv.w.x fs4, s5"]),
    // ----- D -----
    ("fld", &["fld ft1, 16(a0)", "fld fa5, 0(s6)", "fld fs0, -8(t2)"]),
    ("fsd", &["fsd ft2, 16(a1)", "fsd fa6, 0(s7)", "fsd fs1, -8(t3)"]),
    ("fmadd.d", &["fmadd.d ft0, ft1, ft2, ft3", "fmadd.d fa0, fa1, fa2, fa3", "fmadd.d fs0, fs1, ft4, fa4"]),
    ("fmsub.d", &["fmsub.d ft1, ft2, ft3, ft4", "fmsub.d fa1, fa2, fa3, fa4", "fmsub.d fs1, fs2, ft5, fa5"]),
    ("fnmsub.d", &["fnmsub.d ft2, ft3, ft4, ft5", "fnmsub.d fa2, fa3, fa4, fa5", "fnmsub.d fs2, fs3, ft6, fa6"]),
    ("fnmadd.d", &["fnmadd.d ft3, ft4, ft5, ft6", "fnmadd.d fa3, fa4, fa5, fa6", "fnmadd.d fs3, fs4, ft7, fa7"]),
    ("fadd.d", &["fadd.d ft0, ft1, ft2", "fadd.d fa0, fa1, fa2", "fadd.d fs4, fs5, ft8"]),
    ("fsub.d", &["fsub.d ft1, ft2, ft3", "fsub.d fa1, fa2, fa3", "fsub.d fs5, fs6, ft9"]),
    ("fmul.d", &["fmul.d ft2, ft3, ft4", "fmul.d fa2, fa3, fa4", "fmul.d fs6, fs7, ft10"]),
    ("fdiv.d", &["fdiv.d ft3, ft4, ft5", "fdiv.d fa3, fa4, fa5", "fdiv.d fs7, fs8, ft11"]),
    ("fsqrt.d", &["fsqrt.d ft4, ft5", "fsqrt.d fa4, fa5", "fsqrt.d fs8, fs9"]),
    ("fsgnj.d", &["fsgnj.d ft5, ft6, ft7", "fsgnj.d fa5, fa6, fa7", "fsgnj.d fs9, fs10, fs11"]),
    ("fsgnjn.d", &["fsgnjn.d ft6, ft7, ft8", "fsgnjn.d fa6, fa7, fa0", "fsgnjn.d fs10, fs11, fs0"]),
    ("fsgnjx.d", &["fsgnjx.d ft7, ft8, ft9", "fsgnjx.d fa7, fa0, fa1", "fsgnjx.d fs11, fs0, fs1"]),
    ("fmin.d", &["fmin.d ft8, ft9, ft10", "fmin.d fa0, fa2, fa4", "fmin.d fs0, fs2, fs4"]),
    ("fmax.d", &["fmax.d ft9, ft10, ft11", "fmax.d fa1, fa3, fa5", "fmax.d fs1, fs3, fs5"]),
    ("fcvt.s.d", &["fcvt.s.d ft10, ft0", "fcvt.s.d fa6, fa0", "fcvt.s.d fs6, fs0"]),
    ("fcvt.d.s", &["fcvt.d.s ft11, ft1", "fcvt.d.s fa7, fa1", "fcvt.d.s fs7, fs1"]),
    ("feq.d", &["feq.d t5, ft6, ft7", "feq.d a5, fa5, fa6", "feq.d s7, fs7, fs8"]),
    ("flt.d", &["flt.d t6, ft7, ft8", "flt.d a6, fa6, fa7", "flt.d s8, fs8, fs9"]),
    ("fle.d", &["fle.d t0, ft8, ft9", "fle.d a7, fa7, fa0", "fle.d s9, fs9, fs10"]),
    ("fclass.d", &["fclass.d t1, ft9", "fclass.d a0, fa1", "fclass.d s10, fs10"]),
    ("fcvt.w.d", &["fcvt.w.d t0, ft1", "fcvt.w.d a0, fa0", "fcvt.w.d s2, fs2"]),
    ("fcvt.wu.d", &["fcvt.wu.d t1, ft2", "fcvt.wu.d a1, fa1", "fcvt.wu.d s3, fs3"]),
    ("fcvt.l.d", &["fcvt.l.d t2, ft3", "fcvt.l.d a2, fa2", "fcvt.l.d s4, fs4"]),
    ("fcvt.lu.d", &["fcvt.lu.d t3, ft4", "fcvt.lu.d a3, fa3", "fcvt.lu.d s5, fs5"]),
    ("fcvt.d.w", &["fcvt.d.w ft0, t1", "fcvt.d.w fa0, a1", "fcvt.d.w fs0, s1"]),
    ("fcvt.d.wu", &["fcvt.d.wu ft1, t2", "fcvt.d.wu fa1, a2", "fcvt.d.wu fs1, s2"]),
    ("fcvt.d.l", &["fcvt.d.l ft2, t3", "fcvt.d.l fa2, a3", "fcvt.d.l fs2, s3"]),
    ("fcvt.d.lu", &["fcvt.d.lu ft3, t4", "fcvt.d.lu fa3, a4", "fcvt.d.lu fs3, s4"]),
    ("fmv.x.d", &["fmv.x.d t4, ft5", "fmv.x.d a4, fa4", "fmv.x.d s6, fs6"]),
    ("fmv.d.x", &["fmv.d.x ft4, t5", "fmv.d.x fa4, a5", "fmv.d.x fs4, s5"]),
];

/// Compressed instructions, assembled with `.option rvc` and spelled with
/// their explicit `c.` mnemonics.
pub const COMPRESSED: &[Entry] = &[
    ("c.addi4spn", &["c.addi4spn a0, sp, 16", "c.addi4spn s0, sp, 4", "c.addi4spn a5, sp, 1020"]),
    ("c.fld", &["c.fld fa0, 8(a1)", "c.fld fs0, 0(s0)", "c.fld fa5, 248(a2)"]),
    ("c.lw", &["c.lw a2, 4(a3)", "c.lw s1, 0(s0)", "c.lw a4, 124(a5)"]),
    ("c.ld", &["c.ld a4, 8(a5)", "c.ld s0, 0(s1)", "c.ld a0, 248(a1)"]),
    ("c.fsd", &["c.fsd fa1, 24(a2)", "c.fsd fs1, 0(s1)", "c.fsd fa4, 248(a3)"]),
    ("c.sw", &["c.sw a3, 8(a4)", "c.sw s0, 0(s1)", "c.sw a1, 124(a2)"]),
    ("c.sd", &["c.sd a0, 16(a1)", "c.sd s1, 0(s0)", "c.sd a2, 248(a3)"]),
    ("c.nop", &["c.nop", "c.nop", "c.nop"]),
    ("c.addi", &["c.addi a0, 5", "c.addi t0, -3", "c.addi s3, 31"]),
    ("c.addiw", &["c.addiw a1, 3", "c.addiw t3, -32", "c.addiw s4, 31"]),
    ("c.li", &["c.li a2, 7", "c.li t1, -32", "c.li s4, 31"]),
    ("c.addi16sp", &["c.addi16sp sp, 32", "c.addi16sp sp, -64", "c.addi16sp sp, 496"]),
    ("c.lui", &["c.lui a3, 5", "c.lui t2, 1", "c.lui s6, 31"]),
    ("c.srli", &["c.srli a0, 3", "c.srli s0, 1", "c.srli a5, 63"]),
    ("c.srai", &["c.srai a1, 5", "c.srai s1, 1", "c.srai a4, 63"]),
    ("c.andi", &["c.andi a2, 12", "c.andi s0, -32", "c.andi a3, 31"]),
    ("c.sub", &["c.sub a0, a1", "c.sub s0, s1", "c.sub a4, a5"]),
    ("c.xor", &["c.xor a2, a3", "c.xor s1, s0", "c.xor a5, a0"]),
    ("c.or", &["c.or a4, a5", "c.or s0, a0", "c.or a1, a2"]),
    ("c.and", &["c.and s0, s1", "c.and a3, a4", "c.and a5, a1"]),
    ("c.subw", &["c.subw a0, a1", "c.subw s1, s0", "c.subw a2, a5"]),
    ("c.addw", &["c.addw a2, a3", "c.addw s0, a4", "c.addw a5, s1"]),
    ("c.j", &["c.j 1f", "c.j 1f", "c.j 1f"]),
    ("c.beqz", &["c.beqz a0, 1f", "c.beqz s0, 1f", "c.beqz a5, 1f"]),
    ("c.bnez", &["c.bnez a1, 1f", "c.bnez s1, 1f", "c.bnez a4, 1f"]),
    ("c.slli", &["c.slli t0, 9", "c.slli a0, 1", "c.slli s7, 63"]),
    ("c.fldsp", &["c.fldsp fa0, 8(sp)", "c.fldsp ft0, 0(sp)", "c.fldsp fs11, 504(sp)"]),
    ("c.lwsp", &["c.lwsp a0, 4(sp)", "c.lwsp t0, 0(sp)", "c.lwsp s11, 252(sp)"]),
    ("c.ldsp", &["c.ldsp a1, 16(sp)", "c.ldsp t1, 0(sp)", "c.ldsp s10, 504(sp)"]),
    ("c.jr", &["c.jr a0", "c.jr t1", "c.jr s5"]),
    ("c.mv", &["c.mv a0, a1", "c.mv t0, t1", "c.mv s3, s4"]),
    ("c.ebreak", &["c.ebreak", "c.ebreak", "c.ebreak"]),
    ("c.jalr", &["c.jalr a1", "c.jalr t2", "c.jalr s7"]),
    ("c.add", &["c.add a2, a3", "c.add t0, t4", "c.add s5, s6"]),
    ("c.fsdsp", &["c.fsdsp fs0, 16(sp)", "c.fsdsp ft1, 0(sp)", "c.fsdsp fa7, 504(sp)"]),
    ("c.swsp", &["c.swsp a2, 8(sp)", "c.swsp t3, 0(sp)", "c.swsp s9, 252(sp)"]),
    ("c.sdsp", &["c.sdsp a3, 24(sp)", "c.sdsp t5, 0(sp)", "c.sdsp s8, 504(sp)"]),
];
