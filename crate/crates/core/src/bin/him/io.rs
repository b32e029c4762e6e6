use std::fs;
use std::io::{self, Read, Write};
use std::path::Path;

use him::format::{
    cipher_matrix_from_str, cipher_matrix_to_string, ciphertext_from_str, ciphertext_to_string, public_key_from_str,
    secret_key_from_str,
};
use him::{CipherMatrix, Ciphertext, HimError, KeyPair, PublicKey, Result};

/// `-` means stdin.
pub fn read_input(path: &str) -> Result<String> {
    if path == "-" {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s)?;
        return Ok(s);
    }
    fs::read_to_string(path).map_err(|e| HimError::Io(format!("{path}: {e}")))
}

/// `-` means stdout.
pub fn write_output(path: &str, text: &str) -> Result<()> {
    if path == "-" {
        let mut out = io::stdout().lock();
        out.write_all(text.as_bytes())?;
        return Ok(out.flush()?);
    }
    if let Some(dir) = Path::new(path).parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, text).map_err(|e| HimError::Io(format!("{path}: {e}")))
}

pub fn load_public(path: &str) -> Result<PublicKey> {
    public_key_from_str(&read_input(path)?)
}

pub fn load_secret(path: &str) -> Result<KeyPair> {
    secret_key_from_str(&read_input(path)?)
}

/// A ciphertext file holds either one ciphertext or a matrix of them.
#[derive(Debug, Clone)]
pub enum Doc {
    Single(Ciphertext),
    Matrix(CipherMatrix),
}

impl Doc {
    pub fn load(path: &str) -> Result<Doc> {
        let text = read_input(path)?;
        let probe: serde_json::Value = serde_json::from_str(&text)?;
        if probe.get("rows").is_some() {
            Ok(Doc::Matrix(cipher_matrix_from_str(&text)?))
        } else {
            Ok(Doc::Single(ciphertext_from_str(&text)?))
        }
    }

    pub fn to_text(&self) -> String {
        match self {
            Doc::Single(ct) => ciphertext_to_string(ct),
            Doc::Matrix(m) => cipher_matrix_to_string(m),
        }
    }
}
