//! Linear-sweep RISC-V decoder at mnemonic granularity.
//!
//! The unit of decoding is the 16-bit parcel: if its low two bits are `0b11`
//! the parcel starts a 32-bit instruction, otherwise it is a compressed
//! 16-bit instruction. Decoding is total: bytes that match no RV64GC
//! encoding become `unk32`/`unk16`, and a trailing odd byte becomes `pad8`,
//! so the token widths always sum to the input length and arbitrary garbage
//! decodes without error.
//!
//! Tokens are bare mnemonics. Operands are deliberately dropped: the
//! downstream n-gram features model opcode usage, not data flow. Encodings
//! that assemblers print as aliases of a canonical instruction (`nop`,
//! `ret`, hint encodings) decode as the canonical mnemonic, with one
//! exception: the all-but-ubiquitous `0x0001` idiom keeps its own `c.nop`
//! name because quadrant-1 `rd=0` has no other reading.

use std::collections::BTreeSet;
use std::io::{BufRead, Write};
use std::sync::OnceLock;

use thiserror::Error;

pub const TOKEN_UNK16: &str = "unk16";
pub const TOKEN_UNK32: &str = "unk32";
pub const TOKEN_PAD8: &str = "pad8";

#[derive(Debug, Error)]
pub enum DecodeError {
    #[error("line {line}: token {token:?} is not in the decoder vocabulary")]
    UnknownToken { token: String, line: usize },
    #[error("token stream i/o: {0}")]
    Io(#[from] std::io::Error),
}

/// One decoded parcel: canonical token, byte width (1, 2 or 4), raw bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Instruction {
    pub token: &'static str,
    pub width: u8,
    pub raw: u32,
}

/// Token sequence from one binary, tagged with where it came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OpcodeSequence {
    pub tokens: Vec<String>,
    pub source_id: String,
}

impl OpcodeSequence {
    pub fn new(tokens: Vec<String>, source_id: impl Into<String>) -> Self {
        OpcodeSequence { tokens, source_id: source_id.into() }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// One token per line, trailing newline included.
    pub fn write_tokens<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for token in &self.tokens {
            writeln!(w, "{token}")?;
        }
        Ok(())
    }

    /// Reads a token-per-line dump, rejecting tokens outside the vocabulary.
    pub fn read_tokens<R: BufRead>(r: R, source_id: impl Into<String>) -> Result<Self, DecodeError> {
        let mut tokens = Vec::new();
        for (i, line) in r.lines().enumerate() {
            let line = line?;
            let token = line.trim();
            if token.is_empty() {
                continue;
            }
            if !is_vocab_token(token) {
                return Err(DecodeError::UnknownToken { token: token.to_string(), line: i + 1 });
            }
            tokens.push(token.to_string());
        }
        Ok(OpcodeSequence { tokens, source_id: source_id.into() })
    }
}

// ---------------------------------------------------------------------------
// 32-bit decoder
// ---------------------------------------------------------------------------

/// Decodes a 32-bit parcel. Total: anything unrecognized is `unk32`.
pub fn decode32(raw: u32) -> &'static str {
    if raw & 0b11 != 0b11 {
        return TOKEN_UNK32;
    }
    let opcode = raw & 0x7f;
    let funct3 = (raw >> 12) & 0x7;
    let funct7 = (raw >> 25) & 0x7f;

    match opcode {
        0x03 => match funct3 {
            0 => "lb",
            1 => "lh",
            2 => "lw",
            3 => "ld",
            4 => "lbu",
            5 => "lhu",
            6 => "lwu",
            _ => TOKEN_UNK32,
        },
        0x07 => match funct3 {
            2 => "flw",
            3 => "fld",
            _ => TOKEN_UNK32,
        },
        // Any fence mode (incl. fence.tso) folds to the base mnemonic.
        0x0f => match funct3 {
            0 => "fence",
            1 => "fence.i",
            _ => TOKEN_UNK32,
        },
        0x13 => match funct3 {
            0 => "addi",
            1 => {
                // RV64 shift-immediate uses a 6-bit shamt, so funct6 decides.
                if raw >> 26 == 0 {
                    "slli"
                } else {
                    TOKEN_UNK32
                }
            }
            2 => "slti",
            3 => "sltiu",
            4 => "xori",
            5 => match raw >> 26 {
                0b000000 => "srli",
                0b010000 => "srai",
                _ => TOKEN_UNK32,
            },
            6 => "ori",
            7 => "andi",
            _ => unreachable!(),
        },
        0x17 => "auipc",
        0x1b => match (funct3, funct7) {
            (0, _) => "addiw",
            (1, 0b0000000) => "slliw",
            (5, 0b0000000) => "srliw",
            (5, 0b0100000) => "sraiw",
            _ => TOKEN_UNK32,
        },
        0x23 => match funct3 {
            0 => "sb",
            1 => "sh",
            2 => "sw",
            3 => "sd",
            _ => TOKEN_UNK32,
        },
        0x27 => match funct3 {
            2 => "fsw",
            3 => "fsd",
            _ => TOKEN_UNK32,
        },
        0x2f => decode_amo(raw),
        0x33 => match (funct7, funct3) {
            (0b0000000, 0) => "add",
            (0b0000000, 1) => "sll",
            (0b0000000, 2) => "slt",
            (0b0000000, 3) => "sltu",
            (0b0000000, 4) => "xor",
            (0b0000000, 5) => "srl",
            (0b0000000, 6) => "or",
            (0b0000000, 7) => "and",
            (0b0100000, 0) => "sub",
            (0b0100000, 5) => "sra",
            (0b0000001, 0) => "mul",
            (0b0000001, 1) => "mulh",
            (0b0000001, 2) => "mulhsu",
            (0b0000001, 3) => "mulhu",
            (0b0000001, 4) => "div",
            (0b0000001, 5) => "divu",
            (0b0000001, 6) => "rem",
            (0b0000001, 7) => "remu",
            _ => TOKEN_UNK32,
        },
        0x37 => "lui",
        0x3b => match (funct7, funct3) {
            (0b0000000, 0) => "addw",
            (0b0000000, 1) => "sllw",
            (0b0000000, 5) => "srlw",
            (0b0100000, 0) => "subw",
            (0b0100000, 5) => "sraw",
            (0b0000001, 0) => "mulw",
            (0b0000001, 4) => "divw",
            (0b0000001, 5) => "divuw",
            (0b0000001, 6) => "remw",
            (0b0000001, 7) => "remuw",
            _ => TOKEN_UNK32,
        },
        0x43 => fused_fp(raw, "fmadd.s", "fmadd.d"),
        0x47 => fused_fp(raw, "fmsub.s", "fmsub.d"),
        0x4b => fused_fp(raw, "fnmsub.s", "fnmsub.d"),
        0x4f => fused_fp(raw, "fnmadd.s", "fnmadd.d"),
        0x53 => decode_op_fp(raw),
        0x63 => match funct3 {
            0 => "beq",
            1 => "bne",
            4 => "blt",
            5 => "bge",
            6 => "bltu",
            7 => "bgeu",
            _ => TOKEN_UNK32,
        },
        0x67 => {
            if funct3 == 0 {
                "jalr"
            } else {
                TOKEN_UNK32
            }
        }
        0x6f => "jal",
        0x73 => match funct3 {
            0 => match raw {
                0x0000_0073 => "ecall",
                0x0010_0073 => "ebreak",
                // Privileged encodings (wfi, mret, sfence.vma, ...) are
                // outside the vocabulary.
                _ => TOKEN_UNK32,
            },
            1 => "csrrw",
            2 => "csrrs",
            3 => "csrrc",
            5 => "csrrwi",
            6 => "csrrsi",
            7 => "csrrci",
            _ => TOKEN_UNK32,
        },
        _ => TOKEN_UNK32,
    }
}

fn decode_amo(raw: u32) -> &'static str {
    let funct3 = (raw >> 12) & 0x7;
    let funct5 = raw >> 27;
    let rs2 = (raw >> 20) & 0x1f;
    let wide = match funct3 {
        2 => false,
        3 => true,
        _ => return TOKEN_UNK32,
    };
    macro_rules! wd {
        ($w:literal, $d:literal) => {
            if wide {
                $d
            } else {
                $w
            }
        };
    }
    match funct5 {
        0b00010 => {
            if rs2 == 0 {
                wd!("lr.w", "lr.d")
            } else {
                TOKEN_UNK32
            }
        }
        0b00011 => wd!("sc.w", "sc.d"),
        0b00001 => wd!("amoswap.w", "amoswap.d"),
        0b00000 => wd!("amoadd.w", "amoadd.d"),
        0b00100 => wd!("amoxor.w", "amoxor.d"),
        0b01100 => wd!("amoand.w", "amoand.d"),
        0b01000 => wd!("amoor.w", "amoor.d"),
        0b10000 => wd!("amomin.w", "amomin.d"),
        0b10100 => wd!("amomax.w", "amomax.d"),
        0b11000 => wd!("amominu.w", "amominu.d"),
        0b11100 => wd!("amomaxu.w", "amomaxu.d"),
        _ => TOKEN_UNK32,
    }
}

fn fused_fp(raw: u32, single: &'static str, double: &'static str) -> &'static str {
    match (raw >> 25) & 0x3 {
        0 => single,
        1 => double,
        _ => TOKEN_UNK32,
    }
}

fn decode_op_fp(raw: u32) -> &'static str {
    let funct3 = (raw >> 12) & 0x7;
    let rs2 = (raw >> 20) & 0x1f;
    let funct7 = (raw >> 25) & 0x7f;
    match funct7 {
        0b0000000 => "fadd.s",
        0b0000001 => "fadd.d",
        0b0000100 => "fsub.s",
        0b0000101 => "fsub.d",
        0b0001000 => "fmul.s",
        0b0001001 => "fmul.d",
        0b0001100 => "fdiv.s",
        0b0001101 => "fdiv.d",
        0b0101100 if rs2 == 0 => "fsqrt.s",
        0b0101101 if rs2 == 0 => "fsqrt.d",
        0b0010000 => match funct3 {
            0 => "fsgnj.s",
            1 => "fsgnjn.s",
            2 => "fsgnjx.s",
            _ => TOKEN_UNK32,
        },
        0b0010001 => match funct3 {
            0 => "fsgnj.d",
            1 => "fsgnjn.d",
            2 => "fsgnjx.d",
            _ => TOKEN_UNK32,
        },
        0b0010100 => match funct3 {
            0 => "fmin.s",
            1 => "fmax.s",
            _ => TOKEN_UNK32,
        },
        0b0010101 => match funct3 {
            0 => "fmin.d",
            1 => "fmax.d",
            _ => TOKEN_UNK32,
        },
        0b0100000 if rs2 == 1 => "fcvt.s.d",
        0b0100001 if rs2 == 0 => "fcvt.d.s",
        0b1100000 => match rs2 {
            0 => "fcvt.w.s",
            1 => "fcvt.wu.s",
            2 => "fcvt.l.s",
            3 => "fcvt.lu.s",
            _ => TOKEN_UNK32,
        },
        0b1100001 => match rs2 {
            0 => "fcvt.w.d",
            1 => "fcvt.wu.d",
            2 => "fcvt.l.d",
            3 => "fcvt.lu.d",
            _ => TOKEN_UNK32,
        },
        0b1101000 => match rs2 {
            0 => "fcvt.s.w",
            1 => "fcvt.s.wu",
            2 => "fcvt.s.l",
            3 => "fcvt.s.lu",
            _ => TOKEN_UNK32,
        },
        0b1101001 => match rs2 {
            0 => "fcvt.d.w",
            1 => "fcvt.d.wu",
            2 => "fcvt.d.l",
            3 => "fcvt.d.lu",
            _ => TOKEN_UNK32,
        },
        0b1110000 if rs2 == 0 => match funct3 {
            0 => "fmv.x.w",
            1 => "fclass.s",
            _ => TOKEN_UNK32,
        },
        0b1110001 if rs2 == 0 => match funct3 {
            0 => "fmv.x.d",
            1 => "fclass.d",
            _ => TOKEN_UNK32,
        },
        0b1010000 => match funct3 {
            0 => "fle.s",
            1 => "flt.s",
            2 => "feq.s",
            _ => TOKEN_UNK32,
        },
        0b1010001 => match funct3 {
            0 => "fle.d",
            1 => "flt.d",
            2 => "feq.d",
            _ => TOKEN_UNK32,
        },
        0b1111000 if rs2 == 0 && funct3 == 0 => "fmv.w.x",
        0b1111001 if rs2 == 0 && funct3 == 0 => "fmv.d.x",
        _ => TOKEN_UNK32,
    }
}

// ---------------------------------------------------------------------------
// 16-bit decoder
// ---------------------------------------------------------------------------

/// Decodes a compressed parcel under RV64C. Total: anything unrecognized
/// (including the all-zero defined-illegal encoding) is `unk16`.
pub fn decode16(raw: u16) -> &'static str {
    if raw & 0b11 == 0b11 {
        return TOKEN_UNK16;
    }
    let op = raw & 0b11;
    let funct3 = raw >> 13;
    let rd = (raw >> 7) & 0x1f; // rd/rs1 field
    let rs2 = (raw >> 2) & 0x1f;

    match (op, funct3) {
        (0b00, 0b000) => {
            // nzuimm == 0 is reserved; the all-zero parcel is defined illegal.
            if (raw >> 5) & 0xff == 0 {
                TOKEN_UNK16
            } else {
                "c.addi4spn"
            }
        }
        (0b00, 0b001) => "c.fld",
        (0b00, 0b010) => "c.lw",
        (0b00, 0b011) => "c.ld",
        (0b00, 0b101) => "c.fsd",
        (0b00, 0b110) => "c.sw",
        (0b00, 0b111) => "c.sd",
        (0b01, 0b000) => {
            if rd == 0 {
                "c.nop"
            } else {
                "c.addi"
            }
        }
        (0b01, 0b001) => {
            if rd == 0 {
                TOKEN_UNK16
            } else {
                "c.addiw"
            }
        }
        (0b01, 0b010) => "c.li",
        (0b01, 0b011) => {
            let nzimm = ((raw >> 12) & 1) << 5 | ((raw >> 2) & 0x1f);
            if nzimm == 0 {
                TOKEN_UNK16
            } else if rd == 2 {
                "c.addi16sp"
            } else {
                "c.lui"
            }
        }
        (0b01, 0b100) => match (raw >> 10) & 0b11 {
            0b00 => "c.srli",
            0b01 => "c.srai",
            0b10 => "c.andi",
            _ => {
                let sel = (raw >> 5) & 0b11;
                if (raw >> 12) & 1 == 0 {
                    match sel {
                        0b00 => "c.sub",
                        0b01 => "c.xor",
                        0b10 => "c.or",
                        _ => "c.and",
                    }
                } else {
                    match sel {
                        0b00 => "c.subw",
                        0b01 => "c.addw",
                        _ => TOKEN_UNK16,
                    }
                }
            }
        },
        (0b01, 0b101) => "c.j",
        (0b01, 0b110) => "c.beqz",
        (0b01, 0b111) => "c.bnez",
        (0b10, 0b000) => "c.slli",
        (0b10, 0b001) => "c.fldsp",
        (0b10, 0b010) => {
            if rd == 0 {
                TOKEN_UNK16
            } else {
                "c.lwsp"
            }
        }
        (0b10, 0b011) => {
            if rd == 0 {
                TOKEN_UNK16
            } else {
                "c.ldsp"
            }
        }
        (0b10, 0b100) => {
            if (raw >> 12) & 1 == 0 {
                if rs2 == 0 {
                    if rd == 0 {
                        TOKEN_UNK16
                    } else {
                        "c.jr"
                    }
                } else {
                    "c.mv"
                }
            } else if rs2 == 0 {
                if rd == 0 {
                    "c.ebreak"
                } else {
                    "c.jalr"
                }
            } else {
                "c.add"
            }
        }
        (0b10, 0b101) => "c.fsdsp",
        (0b10, 0b110) => "c.swsp",
        (0b10, 0b111) => "c.sdsp",
        _ => TOKEN_UNK16,
    }
}

// ---------------------------------------------------------------------------
// Linear sweep
// ---------------------------------------------------------------------------

/// Sweeps one contiguous byte run. The widths of the returned instructions
/// always sum to `bytes.len()`.
pub fn decode_bytes(bytes: &[u8]) -> Vec<Instruction> {
    let mut out = Vec::with_capacity(bytes.len() / 2);
    let mut i = 0;
    while i < bytes.len() {
        let remaining = bytes.len() - i;
        if remaining == 1 {
            out.push(Instruction { token: TOKEN_PAD8, width: 1, raw: u32::from(bytes[i]) });
            break;
        }
        let half = u16::from_le_bytes([bytes[i], bytes[i + 1]]);
        if half & 0b11 == 0b11 {
            if remaining >= 4 {
                let word =
                    u32::from_le_bytes([bytes[i], bytes[i + 1], bytes[i + 2], bytes[i + 3]]);
                out.push(Instruction { token: decode32(word), width: 4, raw: word });
                i += 4;
            } else {
                // A 32-bit parcel is claimed but the run ends first.
                out.push(Instruction { token: TOKEN_UNK16, width: 2, raw: u32::from(half) });
                i += 2;
            }
        } else {
            out.push(Instruction { token: decode16(half), width: 2, raw: u32::from(half) });
            i += 2;
        }
    }
    out
}

/// Sweeps a set of byte runs (typically [`crate::elf::ElfImage::code_bytes`])
/// into one token sequence. Each run is decoded independently: sweeps never
/// continue across run boundaries.
pub fn decode_stream<'a, I>(runs: I, source_id: impl Into<String>) -> OpcodeSequence
where
    I: IntoIterator<Item = (u64, &'a [u8])>,
{
    let mut tokens = Vec::new();
    for (_addr, bytes) in runs {
        tokens.extend(decode_bytes(bytes).into_iter().map(|ins| ins.token.to_string()));
    }
    OpcodeSequence { tokens, source_id: source_id.into() }
}

// ---------------------------------------------------------------------------
// Vocabulary
// ---------------------------------------------------------------------------

/// Every token the decoder can emit, grouped by extension.
const VOCAB: &[&str] = &[
    // RV64I
    "lui", "auipc", "jal", "jalr", "beq", "bne", "blt", "bge", "bltu", "bgeu", "lb", "lh", "lw",
    "ld", "lbu", "lhu", "lwu", "sb", "sh", "sw", "sd", "addi", "slti", "sltiu", "xori", "ori",
    "andi", "slli", "srli", "srai", "addiw", "slliw", "srliw", "sraiw", "add", "sub", "sll",
    "slt", "sltu", "xor", "srl", "sra", "or", "and", "addw", "subw", "sllw", "srlw", "sraw",
    "fence", "fence.i", "ecall", "ebreak", "csrrw", "csrrs", "csrrc", "csrrwi", "csrrsi",
    "csrrci",
    // M
    "mul", "mulh", "mulhsu", "mulhu", "div", "divu", "rem", "remu", "mulw", "divw", "divuw",
    "remw", "remuw",
    // A
    "lr.w", "sc.w", "amoswap.w", "amoadd.w", "amoxor.w", "amoand.w", "amoor.w", "amomin.w",
    "amomax.w", "amominu.w", "amomaxu.w", "lr.d", "sc.d", "amoswap.d", "amoadd.d", "amoxor.d",
    "amoand.d", "amoor.d", "amomin.d", "amomax.d", "amominu.d", "amomaxu.d",
    // F
    "flw", "fsw", "fmadd.s", "fmsub.s", "fnmsub.s", "fnmadd.s", "fadd.s", "fsub.s", "fmul.s",
    "fdiv.s", "fsqrt.s", "fsgnj.s", "fsgnjn.s", "fsgnjx.s", "fmin.s", "fmax.s", "fcvt.w.s",
    "fcvt.wu.s", "fcvt.l.s", "fcvt.lu.s", "fmv.x.w", "feq.s", "flt.s", "fle.s", "fclass.s",
    "fcvt.s.w", "fcvt.s.wu", "fcvt.s.l", "fcvt.s.lu", "fmv.w.x",
    // D
    "fld", "fsd", "fmadd.d", "fmsub.d", "fnmsub.d", "fnmadd.d", "fadd.d", "fsub.d", "fmul.d",
    "fdiv.d", "fsqrt.d", "fsgnj.d", "fsgnjn.d", "fsgnjx.d", "fmin.d", "fmax.d", "fcvt.s.d",
    "fcvt.d.s", "feq.d", "flt.d", "fle.d", "fclass.d", "fcvt.w.d", "fcvt.wu.d", "fcvt.l.d",
    "fcvt.lu.d", "fcvt.d.w", "fcvt.d.wu", "fcvt.d.l", "fcvt.d.lu", "fmv.x.d", "fmv.d.x",
    // C
    "c.addi4spn", "c.fld", "c.lw", "c.ld", "c.fsd", "c.sw", "c.sd", "c.nop", "c.addi",
    "c.addiw", "c.li", "c.addi16sp", "c.lui", "c.srli", "c.srai", "c.andi", "c.sub", "c.xor",
    "c.or", "c.and", "c.subw", "c.addw", "c.j", "c.beqz", "c.bnez", "c.slli", "c.fldsp",
    "c.lwsp", "c.ldsp", "c.jr", "c.mv", "c.ebreak", "c.jalr", "c.add", "c.fsdsp", "c.swsp",
    "c.sdsp",
    // Fallback tokens
    TOKEN_UNK16, TOKEN_UNK32, TOKEN_PAD8,
];

/// Sorted, deduplicated token vocabulary.
pub fn vocabulary() -> &'static [&'static str] {
    static SORTED: OnceLock<Vec<&'static str>> = OnceLock::new();
    SORTED.get_or_init(|| {
        let set: BTreeSet<&'static str> = VOCAB.iter().copied().collect();
        assert_eq!(set.len(), VOCAB.len(), "duplicate vocabulary token");
        set.into_iter().collect()
    })
}

pub fn is_vocab_token(token: &str) -> bool {
    vocabulary().binary_search(&token).is_ok()
}
