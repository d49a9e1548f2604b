//! Regenerates the decoder test oracle and the committed ELF fixtures.
//!
//! The flow for the instruction goldens is deliberately independent of the
//! decoder under test:
//!
//! 1. Every decodable mnemonic is written out three times with varied
//!    operands (chosen so no assembler alias changes the spelling).
//! 2. clang's RISC-V backend assembles the file; that pins the encodings.
//! 3. capstone disassembles the resulting bytes and every mnemonic is
//!    cross-checked against the intended one. Any disagreement aborts.
//! 4. The verified `hex-bytes<TAB>mnemonic` pairs are frozen to
//!    `crates/rvguard/tests/data/decoder_goldens.tsv`.
//!
//! The decoder's own test suite replays the frozen file; it never invokes
//! clang or capstone, so the main workspace stays free of C toolchain
//! dependencies.
//!
//! Usage: `cargo run --release` from this directory, at the repo root.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use anyhow::{bail, Context, Result};
use capstone::arch::riscv::{ArchExtraMode, ArchMode};
use capstone::arch::{BuildsCapstone, BuildsCapstoneExtraMode};
use capstone::Capstone;

mod table;

fn repo_root() -> PathBuf {
    // tools/decoder-oracle -> repo root is two levels up.
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").canonicalize().expect("repo root")
}

fn run(cmd: &mut Command) -> Result<()> {
    let desc = format!("{cmd:?}");
    let status = cmd.status().with_context(|| format!("spawning {desc}"))?;
    if !status.success() {
        bail!("{desc} failed with {status}");
    }
    Ok(())
}

fn assemble_riscv(asm: &str, dir: &Path, name: &str, march: &str) -> Result<Vec<u8>> {
    let s_path = dir.join(format!("{name}.s"));
    let o_path = dir.join(format!("{name}.o"));
    fs::write(&s_path, asm)?;
    run(Command::new("clang")
        .arg("--target=riscv64")
        .arg(format!("-march={march}"))
        .arg("-mno-relax")
        .arg("-c")
        .arg(&s_path)
        .arg("-o")
        .arg(&o_path))?;
    let bytes = fs::read(&o_path)?;
    let image = rvguard::elf::parse_elf(&bytes, true)
        .map_err(|e| anyhow::anyhow!("parsing {}: {e}", o_path.display()))?;
    let text = image
        .sections
        .iter()
        .find(|s| s.name == ".text" && s.is_code())
        .context("no .text section in assembled object")?;
    Ok(text.bytes.clone())
}

fn capstone_rv64() -> Result<Capstone> {
    Capstone::new()
        .riscv()
        .mode(ArchMode::RiscV64)
        .extra_mode(std::iter::once(ArchExtraMode::RiscVC))
        .build()
        .map_err(|e| anyhow::anyhow!("capstone init: {e}"))
}

/// Renders the golden corpus as one assembly file. Returns the text and the
/// expected mnemonic per instruction, in order.
fn render_corpus() -> (String, Vec<&'static str>) {
    let mut asm = String::from(".text\n.option norvc\n");
    let mut expected = Vec::new();
    for (mnemonic, lines) in table::WIDE {
        for line in *lines {
            writeln!(asm, "    {line}").unwrap();
            if line.contains("1f") {
                asm.push_str("1:\n");
            }
            expected.push(*mnemonic);
        }
    }
    asm.push_str(".option rvc\n");
    for (mnemonic, lines) in table::COMPRESSED {
        for line in *lines {
            writeln!(asm, "    {line}").unwrap();
            if line.contains("1f") {
                asm.push_str("1:\n");
            }
            expected.push(*mnemonic);
        }
    }
    // End on a plain word so any assembler tail padding is impossible to
    // confuse with the corpus.
    asm.push_str(".option norvc\n    xori t6, t5, 21\n");
    expected.push("xori");
    (asm, expected)
}

fn generate_goldens(root: &Path, scratch: &Path) -> Result<()> {
    let (asm, expected) = render_corpus();
    let text = assemble_riscv(&asm, scratch, "golden", "rv64gc")?;

    let cs = capstone_rv64()?;
    let mut entries: Vec<(String, &'static str)> = Vec::new();
    let mut offset = 0usize;
    let mut mismatches = Vec::new();
    for want in &expected {
        let insns = cs
            .disasm_count(&text[offset..], 0x10000 + offset as u64, 1)
            .map_err(|e| anyhow::anyhow!("capstone at offset {offset}: {e}"))?;
        let Some(insn) = insns.iter().next() else {
            bail!(
                "capstone could not decode bytes at offset {offset}: {:02x?}",
                &text[offset..(offset + 4).min(text.len())]
            );
        };
        let got = insn.mnemonic().unwrap_or("<none>");
        if got != *want {
            mismatches.push(format!(
                "offset {offset}: assembled {want:?}, capstone reads {got:?} ({:02x?})",
                insn.bytes()
            ));
        }
        let hex: String = insn.bytes().iter().map(|b| format!("{b:02x}")).collect();
        entries.push((hex, want));
        offset += insn.bytes().len();
    }
    if !mismatches.is_empty() {
        bail!("mnemonic cross-check failed:\n{}", mismatches.join("\n"));
    }
    if offset != text.len() {
        bail!("decoded {offset} of {} text bytes; trailing padding?", text.len());
    }

    let mut out = String::new();
    writeln!(out, "# Decoder goldens: {} instructions.", entries.len()).unwrap();
    writeln!(out, "# Encoded by clang --target=riscv64 -march=rv64gc; every mnemonic").unwrap();
    writeln!(out, "# cross-checked against the capstone disassembler before freezing.").unwrap();
    writeln!(out, "# Regenerate with `cargo run` in tools/decoder-oracle. Format:").unwrap();
    writeln!(out, "# <little-endian instruction bytes as hex>\\t<mnemonic>").unwrap();
    for (hex, mnem) in &entries {
        writeln!(out, "{hex}\t{mnem}").unwrap();
    }
    let dest = root.join("crates/rvguard/tests/data/decoder_goldens.tsv");
    fs::create_dir_all(dest.parent().unwrap())?;
    fs::write(&dest, out)?;
    println!("wrote {} instructions to {}", entries.len(), dest.display());
    Ok(())
}

fn generate_fixtures(root: &Path, scratch: &Path) -> Result<()> {
    let fixtures = root.join("crates/rvguard/tests/fixtures");
    fs::create_dir_all(&fixtures)?;

    // Minimal linked RISC-V executable: one 4-byte .text holding a plain nop.
    // rv64g (no C) keeps the assembler from compressing it.
    let asm = ".text\n.globl _start\n_start:\n    nop\n";
    let s_path = scratch.join("minimal.s");
    let o_path = scratch.join("minimal.o");
    fs::write(&s_path, asm)?;
    run(Command::new("clang")
        .arg("--target=riscv64")
        .arg("-march=rv64g")
        .arg("-mno-relax")
        .arg("-c")
        .arg(&s_path)
        .arg("-o")
        .arg(&o_path))?;
    let elf_path = fixtures.join("minimal_rv64.elf");
    run(Command::new("ld.lld")
        .arg("-e")
        .arg("_start")
        .arg(&o_path)
        .arg("-o")
        .arg(&elf_path))?;
    println!("wrote {}", elf_path.display());

    // Same-shape executable for a different machine, for strict-mode tests.
    let asm = ".text\n.globl _start\n_start:\n    ret\n";
    let s_path = scratch.join("other.s");
    let o_path = scratch.join("other.o");
    fs::write(&s_path, asm)?;
    run(Command::new("clang")
        .arg("--target=x86_64-unknown-linux-gnu")
        .arg("-c")
        .arg(&s_path)
        .arg("-o")
        .arg(&o_path))?;
    let other_path = fixtures.join("other_arch.elf");
    run(Command::new("ld.lld")
        .arg("-e")
        .arg("_start")
        .arg(&o_path)
        .arg("-o")
        .arg(&other_path))?;
    println!("wrote {}", other_path.display());
    Ok(())
}

fn main() -> Result<()> {
    let root = repo_root();
    let scratch = std::env::temp_dir().join("decoder-oracle");
    fs::create_dir_all(&scratch)?;
    generate_goldens(&root, &scratch)?;
    generate_fixtures(&root, &scratch)?;
    Ok(())
}
