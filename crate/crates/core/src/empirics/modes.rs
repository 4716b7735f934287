use super::prp::BlockCipher;
use super::EmpiricsError;

fn check_blocks<C: BlockCipher>(cipher: &C, blocks: &[u64]) -> Result<(), EmpiricsError> {
    let n = cipher.domain_size();
    match blocks.iter().find(|&&b| b >= n) {
        Some(&block) => Err(EmpiricsError::OutOfRange { block, block_bits: cipher.block_bits() }),
        None => Ok(()),
    }
}

/// Keystream block `i` is `E(iv + i mod 2^b)`.
pub fn ctr_keystream<C: BlockCipher>(cipher: &C, iv: u64, len: usize) -> Result<Vec<u64>, EmpiricsError> {
    check_blocks(cipher, &[iv])?;
    let mask = cipher.domain_size() - 1;
    Ok((0..len as u64).map(|i| cipher.encrypt_block(iv.wrapping_add(i) & mask)).collect())
}

pub fn ctr_encrypt<C: BlockCipher>(cipher: &C, iv: u64, plaintext: &[u64]) -> Result<Vec<u64>, EmpiricsError> {
    check_blocks(cipher, plaintext)?;
    let ks = ctr_keystream(cipher, iv, plaintext.len())?;
    Ok(plaintext.iter().zip(ks).map(|(p, k)| p ^ k).collect())
}

pub fn ctr_decrypt<C: BlockCipher>(cipher: &C, iv: u64, ciphertext: &[u64]) -> Result<Vec<u64>, EmpiricsError> {
    ctr_encrypt(cipher, iv, ciphertext)
}

pub fn cbc_encrypt<C: BlockCipher>(cipher: &C, iv: u64, plaintext: &[u64]) -> Result<Vec<u64>, EmpiricsError> {
    check_blocks(cipher, &[iv])?;
    check_blocks(cipher, plaintext)?;
    let mut prev = iv;
    Ok(plaintext
        .iter()
        .map(|&p| {
            prev = cipher.encrypt_block(p ^ prev);
            prev
        })
        .collect())
}

pub fn cbc_decrypt<C: BlockCipher>(cipher: &C, iv: u64, ciphertext: &[u64]) -> Result<Vec<u64>, EmpiricsError> {
    check_blocks(cipher, &[iv])?;
    check_blocks(cipher, ciphertext)?;
    let mut prev = iv;
    Ok(ciphertext
        .iter()
        .map(|&c| {
            let p = cipher.decrypt_block(c) ^ prev;
            prev = c;
            p
        })
        .collect())
}

/// Last CBC ciphertext block under a zero IV.
pub fn cbc_residue<C: BlockCipher>(cipher: &C, message: &[u64]) -> Result<u64, EmpiricsError> {
    if message.is_empty() {
        return Err(EmpiricsError::EmptyMessage);
    }
    Ok(*cbc_encrypt(cipher, 0, message)?.last().expect("non-empty"))
}

/// `tag = E(k2, cbc_residue(k1, message))`.
pub fn ecbc_mac<C: BlockCipher>(inner: &C, outer: &C, message: &[u64]) -> Result<u64, EmpiricsError> {
    let t = cbc_residue(inner, message)?;
    Ok(outer.encrypt_block(t))
}
