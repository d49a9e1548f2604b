//! Minimal ELF64 little-endian reader, driven by section headers.
//!
//! The loader exists to get executable bytes out of RISC-V binaries and
//! nothing more: no relocation, no dynamic linking, no program headers.
//! Section headers are authoritative because the decoder wants per-section
//! byte runs with their virtual addresses, and object files (which have no
//! program headers) must load the same way as linked executables.

use thiserror::Error;

/// `e_machine` value for RISC-V.
pub const EM_RISCV: u16 = 243;

const ELF_MAGIC: [u8; 4] = [0x7f, b'E', b'L', b'F'];
const ELFCLASS64: u8 = 2;
const ELFDATA2LSB: u8 = 1;
const SECTION_HEADER_LEN: u64 = 64;

const SHT_PROGBITS: u32 = 1;
const SHT_NOBITS: u32 = 8;

const SHF_WRITE: u64 = 0x1;
const SHF_ALLOC: u64 = 0x2;
const SHF_EXECINSTR: u64 = 0x4;

#[derive(Debug, Error)]
pub enum ElfError {
    #[error("not an ELF file: bad magic")]
    BadMagic,
    #[error("unsupported ELF variant: {0}")]
    Unsupported(String),
    #[error("file truncated or offset out of bounds: {0}")]
    Truncated(String),
    #[error("machine type {found} is not RISC-V ({EM_RISCV})")]
    MachineMismatch { found: u16 },
}

/// Relevant subset of a section's `sh_flags`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SectionFlags {
    pub alloc: bool,
    pub exec: bool,
    pub write: bool,
}

#[derive(Debug, Clone)]
pub struct Section {
    pub name: String,
    pub sh_type: u32,
    pub flags: SectionFlags,
    /// Virtual address (`sh_addr`).
    pub addr: u64,
    pub size: u64,
    /// File bytes; empty for `SHT_NOBITS`.
    pub bytes: Vec<u8>,
}

impl Section {
    /// True for sections the decoder should sweep: allocated, executable,
    /// backed by file bytes.
    pub fn is_code(&self) -> bool {
        self.sh_type == SHT_PROGBITS && self.flags.alloc && self.flags.exec
    }
}

#[derive(Debug, Clone)]
pub struct ElfImage {
    pub machine: u16,
    pub entry: u64,
    /// All sections except the mandatory null entry at index 0.
    pub sections: Vec<Section>,
}

impl ElfImage {
    pub fn is_riscv(&self) -> bool {
        self.machine == EM_RISCV
    }

    /// Executable byte runs as `(virtual address, bytes)`, sorted by address.
    pub fn code_bytes(&self) -> Vec<(u64, &[u8])> {
        let mut runs: Vec<(u64, &[u8])> = self
            .sections
            .iter()
            .filter(|s| s.is_code())
            .map(|s| (s.addr, s.bytes.as_slice()))
            .collect();
        runs.sort_by_key(|&(addr, _)| addr);
        runs
    }
}

fn read_bytes<'a>(data: &'a [u8], offset: u64, len: u64, what: &str) -> Result<&'a [u8], ElfError> {
    let end = offset
        .checked_add(len)
        .ok_or_else(|| ElfError::Truncated(format!("{what}: offset overflow")))?;
    if end > data.len() as u64 {
        return Err(ElfError::Truncated(format!(
            "{what}: need bytes {offset}..{end}, file has {}",
            data.len()
        )));
    }
    Ok(&data[offset as usize..end as usize])
}

fn read_u16(data: &[u8], offset: u64, what: &str) -> Result<u16, ElfError> {
    let b = read_bytes(data, offset, 2, what)?;
    Ok(u16::from_le_bytes([b[0], b[1]]))
}

fn read_u32(data: &[u8], offset: u64, what: &str) -> Result<u32, ElfError> {
    let b = read_bytes(data, offset, 4, what)?;
    Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
}

fn read_u64(data: &[u8], offset: u64, what: &str) -> Result<u64, ElfError> {
    let b = read_bytes(data, offset, 8, what)?;
    Ok(u64::from_le_bytes(b.try_into().unwrap()))
}

/// Parses an ELF64 little-endian image.
///
/// With `strict` set, a machine type other than [`EM_RISCV`] is rejected
/// with [`ElfError::MachineMismatch`]; otherwise any machine is accepted and
/// recorded in the image for the caller to inspect.
///
/// Total over arbitrary input: every malformed byte string maps to an error,
/// never a panic.
pub fn parse_elf(data: &[u8], strict: bool) -> Result<ElfImage, ElfError> {
    if data.len() < 4 || data[..4] != ELF_MAGIC {
        return Err(ElfError::BadMagic);
    }
    let ident = read_bytes(data, 0, 16, "e_ident")?;
    if ident[4] != ELFCLASS64 {
        return Err(ElfError::Unsupported(format!("ELF class {}", ident[4])));
    }
    if ident[5] != ELFDATA2LSB {
        return Err(ElfError::Unsupported(format!("ELF data encoding {}", ident[5])));
    }
    if ident[6] != 1 {
        return Err(ElfError::Unsupported(format!("ELF ident version {}", ident[6])));
    }

    let machine = read_u16(data, 18, "e_machine")?;
    if strict && machine != EM_RISCV {
        return Err(ElfError::MachineMismatch { found: machine });
    }
    let entry = read_u64(data, 24, "e_entry")?;
    let shoff = read_u64(data, 40, "e_shoff")?;
    let shentsize = read_u16(data, 58, "e_shentsize")?;
    let shnum = read_u16(data, 60, "e_shnum")?;
    let shstrndx = read_u16(data, 62, "e_shstrndx")?;

    // No section table at all: legal, yields an image with no sections.
    if shoff == 0 || shnum == 0 {
        return Ok(ElfImage { machine, entry, sections: Vec::new() });
    }
    if u64::from(shentsize) != SECTION_HEADER_LEN {
        return Err(ElfError::Unsupported(format!("e_shentsize {shentsize}")));
    }

    let header_at = |index: u64| shoff + index * SECTION_HEADER_LEN;

    // String table for section names; index 0 means "no names".
    let strtab: Option<&[u8]> = if shstrndx == 0 {
        None
    } else {
        if shstrndx >= shnum {
            return Err(ElfError::Truncated(format!(
                "e_shstrndx {shstrndx} out of range ({shnum} sections)"
            )));
        }
        let base = header_at(u64::from(shstrndx));
        let offset = read_u64(data, base + 24, "shstrtab sh_offset")?;
        let size = read_u64(data, base + 32, "shstrtab sh_size")?;
        Some(read_bytes(data, offset, size, "section name table")?)
    };

    let mut sections = Vec::with_capacity(usize::from(shnum).saturating_sub(1));
    for index in 1..u64::from(shnum) {
        let base = header_at(index);
        let sh_name = read_u32(data, base, "sh_name")?;
        let sh_type = read_u32(data, base + 4, "sh_type")?;
        let sh_flags = read_u64(data, base + 8, "sh_flags")?;
        let sh_addr = read_u64(data, base + 16, "sh_addr")?;
        let sh_offset = read_u64(data, base + 24, "sh_offset")?;
        let sh_size = read_u64(data, base + 32, "sh_size")?;

        let name = match strtab {
            Some(tab) => {
                let start = sh_name as usize;
                if start > tab.len() {
                    return Err(ElfError::Truncated(format!(
                        "sh_name {start} beyond name table of {} bytes",
                        tab.len()
                    )));
                }
                let rest = &tab[start..];
                let end = rest.iter().position(|&b| b == 0).unwrap_or(rest.len());
                String::from_utf8_lossy(&rest[..end]).into_owned()
            }
            None => String::new(),
        };

        let bytes = if sh_type == SHT_NOBITS {
            Vec::new()
        } else {
            read_bytes(data, sh_offset, sh_size, &format!("section {name:?} contents"))?.to_vec()
        };

        sections.push(Section {
            name,
            sh_type,
            flags: SectionFlags {
                alloc: sh_flags & SHF_ALLOC != 0,
                exec: sh_flags & SHF_EXECINSTR != 0,
                write: sh_flags & SHF_WRITE != 0,
            },
            addr: sh_addr,
            size: sh_size,
            bytes,
        });
    }

    Ok(ElfImage { machine, entry, sections })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Hand-assembled ELF64 builder so tests control every header field.
    pub(crate) struct TestElf {
        machine: u16,
        sections: Vec<(String, u32, u64, u64, Vec<u8>)>, // name, type, flags, addr, bytes
    }

    impl TestElf {
        pub(crate) fn new(machine: u16) -> Self {
            TestElf { machine, sections: Vec::new() }
        }

        pub(crate) fn section(
            mut self,
            name: &str,
            sh_type: u32,
            flags: u64,
            addr: u64,
            bytes: &[u8],
        ) -> Self {
            self.sections.push((name.to_string(), sh_type, flags, addr, bytes.to_vec()));
            self
        }

        pub(crate) fn build(&self) -> Vec<u8> {
            // Layout: ehdr | section bytes | shstrtab | section headers.
            let mut strtab = vec![0u8];
            let mut name_offsets = Vec::new();
            for (name, ..) in &self.sections {
                name_offsets.push(strtab.len() as u32);
                strtab.extend_from_slice(name.as_bytes());
                strtab.push(0);
            }
            let shstr_name_off = strtab.len() as u32;
            strtab.extend_from_slice(b".shstrtab\0");

            let ehdr_len = 64u64;
            let mut payload = Vec::new();
            let mut payload_offsets = Vec::new();
            for (_, sh_type, _, _, bytes) in &self.sections {
                payload_offsets.push(ehdr_len + payload.len() as u64);
                if *sh_type != SHT_NOBITS {
                    payload.extend_from_slice(bytes);
                }
            }
            let strtab_off = ehdr_len + payload.len() as u64;
            let shoff = strtab_off + strtab.len() as u64;
            // Headers: null, user sections, shstrtab.
            let shnum = self.sections.len() as u16 + 2;
            let shstrndx = shnum - 1;

            let mut out = Vec::new();
            out.extend_from_slice(&ELF_MAGIC);
            out.extend_from_slice(&[ELFCLASS64, ELFDATA2LSB, 1, 0]);
            out.extend_from_slice(&[0; 8]);
            out.extend_from_slice(&2u16.to_le_bytes()); // e_type = EXEC
            out.extend_from_slice(&self.machine.to_le_bytes());
            out.extend_from_slice(&1u32.to_le_bytes()); // e_version
            out.extend_from_slice(&0x1_0000u64.to_le_bytes()); // e_entry
            out.extend_from_slice(&0u64.to_le_bytes()); // e_phoff
            out.extend_from_slice(&shoff.to_le_bytes());
            out.extend_from_slice(&0u32.to_le_bytes()); // e_flags
            out.extend_from_slice(&64u16.to_le_bytes()); // e_ehsize
            out.extend_from_slice(&0u16.to_le_bytes()); // e_phentsize
            out.extend_from_slice(&0u16.to_le_bytes()); // e_phnum
            out.extend_from_slice(&64u16.to_le_bytes()); // e_shentsize
            out.extend_from_slice(&shnum.to_le_bytes());
            out.extend_from_slice(&shstrndx.to_le_bytes());
            assert_eq!(out.len(), 64);

            out.extend_from_slice(&payload);
            out.extend_from_slice(&strtab);

            let shdr = |name_off: u32, ty: u32, flags: u64, addr: u64, off: u64, size: u64| {
                let mut h = Vec::with_capacity(64);
                h.extend_from_slice(&name_off.to_le_bytes());
                h.extend_from_slice(&ty.to_le_bytes());
                h.extend_from_slice(&flags.to_le_bytes());
                h.extend_from_slice(&addr.to_le_bytes());
                h.extend_from_slice(&off.to_le_bytes());
                h.extend_from_slice(&size.to_le_bytes());
                h.extend_from_slice(&0u32.to_le_bytes()); // sh_link
                h.extend_from_slice(&0u32.to_le_bytes()); // sh_info
                h.extend_from_slice(&1u64.to_le_bytes()); // sh_addralign
                h.extend_from_slice(&0u64.to_le_bytes()); // sh_entsize
                h
            };

            out.extend_from_slice(&shdr(0, 0, 0, 0, 0, 0));
            for (i, (_, sh_type, flags, addr, bytes)) in self.sections.iter().enumerate() {
                out.extend_from_slice(&shdr(
                    name_offsets[i],
                    *sh_type,
                    *flags,
                    *addr,
                    payload_offsets[i],
                    bytes.len() as u64,
                ));
            }
            out.extend_from_slice(&shdr(
                shstr_name_off,
                3, // SHT_STRTAB
                0,
                0,
                strtab_off,
                strtab.len() as u64,
            ));
            out
        }
    }

    pub(crate) fn riscv_elf_with_text(text: &[u8]) -> Vec<u8> {
        TestElf::new(EM_RISCV)
            .section(".text", SHT_PROGBITS, SHF_ALLOC | SHF_EXECINSTR, 0x1_0000, text)
            .build()
    }

    #[test]
    fn minimal_image_has_one_exec_section() {
        let bytes = riscv_elf_with_text(&[0x13, 0x00, 0x00, 0x00]);
        let image = parse_elf(&bytes, true).unwrap();
        assert!(image.is_riscv());
        let code = image.code_bytes();
        assert_eq!(code.len(), 1);
        assert_eq!(code[0].0, 0x1_0000);
        assert_eq!(code[0].1, &[0x13, 0x00, 0x00, 0x00]);
    }

    #[test]
    fn bad_magic_detected() {
        assert!(matches!(parse_elf(b"\x7fBLF....", false), Err(ElfError::BadMagic)));
        assert!(matches!(parse_elf(&[], false), Err(ElfError::BadMagic)));
    }

    #[test]
    fn strict_rejects_foreign_machine() {
        let bytes = TestElf::new(62) // EM_X86_64
            .section(".text", SHT_PROGBITS, SHF_ALLOC | SHF_EXECINSTR, 0x400000, &[0xc3])
            .build();
        match parse_elf(&bytes, true) {
            Err(ElfError::MachineMismatch { found }) => assert_eq!(found, 62),
            other => panic!("expected MachineMismatch, got {other:?}"),
        }
        // Lax mode loads it and reports the machine.
        let image = parse_elf(&bytes, false).unwrap();
        assert_eq!(image.machine, 62);
        assert!(!image.is_riscv());
    }

    #[test]
    fn wrong_class_and_endianness_reported() {
        let mut bytes = riscv_elf_with_text(&[0x13, 0x00, 0x00, 0x00]);
        bytes[4] = 1; // ELFCLASS32
        assert!(matches!(parse_elf(&bytes, true), Err(ElfError::Unsupported(_))));
        let mut bytes = riscv_elf_with_text(&[0x13, 0x00, 0x00, 0x00]);
        bytes[5] = 2; // big-endian
        assert!(matches!(parse_elf(&bytes, true), Err(ElfError::Unsupported(_))));
    }

    #[test]
    fn truncation_reported_with_context() {
        let bytes = riscv_elf_with_text(&[0x13, 0x00, 0x00, 0x00]);
        // Cut inside the section header table.
        let shoff = u64::from_le_bytes(bytes[40..48].try_into().unwrap());
        let cut = &bytes[..shoff as usize + 70];
        assert!(matches!(parse_elf(cut, true), Err(ElfError::Truncated(_))));
        // Cut inside the ELF header itself.
        assert!(matches!(parse_elf(&bytes[..40], true), Err(ElfError::Truncated(_))));
    }

    #[test]
    fn section_bytes_beyond_eof_truncated() {
        let mut bytes = riscv_elf_with_text(&[0x13, 0x00, 0x00, 0x00]);
        // First non-null section header starts at shoff + 64; sh_size is at +32.
        let shoff = u64::from_le_bytes(bytes[40..48].try_into().unwrap());
        let size_at = (shoff + 64 + 32) as usize;
        bytes[size_at..size_at + 8].copy_from_slice(&0xffff_u64.to_le_bytes());
        assert!(matches!(parse_elf(&bytes, true), Err(ElfError::Truncated(_))));
    }

    #[test]
    fn nobits_contributes_no_bytes() {
        let bytes = TestElf::new(EM_RISCV)
            .section(".text", SHT_PROGBITS, SHF_ALLOC | SHF_EXECINSTR, 0x1000, &[0x13, 0, 0, 0])
            .section(".bss", SHT_NOBITS, SHF_ALLOC | SHF_WRITE, 0x2000, &[0; 64])
            .build();
        let image = parse_elf(&bytes, true).unwrap();
        let bss = image.sections.iter().find(|s| s.name == ".bss").unwrap();
        assert_eq!(bss.size, 64);
        assert!(bss.bytes.is_empty());
        assert_eq!(image.code_bytes().len(), 1);
    }

    #[test]
    fn code_runs_sorted_by_address() {
        let bytes = TestElf::new(EM_RISCV)
            .section(".text.hot", SHT_PROGBITS, SHF_ALLOC | SHF_EXECINSTR, 0x9000, &[1, 2])
            .section(".text", SHT_PROGBITS, SHF_ALLOC | SHF_EXECINSTR, 0x1000, &[3, 4])
            .section(".rodata", SHT_PROGBITS, SHF_ALLOC, 0x5000, &[5, 6])
            .build();
        let image = parse_elf(&bytes, true).unwrap();
        let code = image.code_bytes();
        assert_eq!(code.len(), 2);
        assert!(code[0].0 < code[1].0);
        assert_eq!(code[0].1, &[3, 4]);
    }

    proptest! {
        // Total over garbage: any byte string below 64 KiB either parses or
        // returns a structured error; no panics, no unbounded allocation.
        #[test]
        fn parse_never_panics(data in proptest::collection::vec(any::<u8>(), 0..65536)) {
            let _ = parse_elf(&data, false);
            let _ = parse_elf(&data, true);
        }

        // Flipping any single byte of a valid image never panics either.
        #[test]
        fn mutated_valid_image_never_panics(pos in 0usize..188, val in any::<u8>()) {
            let mut bytes = riscv_elf_with_text(&[0x13, 0x00, 0x00, 0x00]);
            prop_assume!(pos < bytes.len());
            bytes[pos] = val;
            let _ = parse_elf(&bytes, true);
        }
    }
}
