use crc::{Crc, CRC_64_XZ};

use crate::bits::pack_bytes;

/// Bits disclosed by one verification tag.
pub const TAG_BITS: usize = 64;

const CRC64: Crc<u64> = Crc::<u64>::new(&CRC_64_XZ);

pub(crate) fn crc64(bytes: &[u8]) -> u64 {
    CRC64.checksum(bytes)
}

/// 64-bit CRC of a bit string, with its length folded in so that strings
/// differing only in trailing zero padding get different tags.
pub fn verification_tag(bits: &[bool]) -> u64 {
    let mut digest = CRC64.digest();
    digest.update(&(bits.len() as u64).to_le_bytes());
    digest.update(&pack_bytes(bits));
    digest.finalize()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tag_detects_single_flip_and_length() {
        let a = [true, false, true, true, false];
        let mut b = a;
        b[3] = false;
        assert_ne!(verification_tag(&a), verification_tag(&b));
        assert_ne!(verification_tag(&[false; 3]), verification_tag(&[false; 4]));
        assert_eq!(crc64(b"123456789"), 0x995dc9bbdf1939fa);
    }
}
