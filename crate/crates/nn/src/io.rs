//! THZNN1 model files: little-endian binary serialization of a layer stack
//! plus named extra tensors (normalizers and the like).
//!
//! Layout: magic `"THZNN1\0"`, `version u32`, `arch_kind u16`,
//! `meta_len u32` + `meta u32...`, `num_layers u32`, then per layer
//! `{kind u16, n_state u16, state f64..., n_tensors u16, tensors...}`,
//! then `num_extras u32` of `{name_len u8, name ascii, tensor}`. A tensor
//! is `{ndim u32, dims u32..., data f64...}`.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};

use crate::error::NnError;
use crate::layers::{layer_from_record, LayerKind, Network};
use crate::tensor::Tensor;

pub const MODEL_MAGIC: &[u8; 7] = b"THZNN1\0";
pub const MODEL_VERSION: u32 = 1;

/// A serialized model: the network plus architecture identification data
/// and named side tensors.
pub struct ModelFile {
    pub arch_kind: u16,
    pub meta: Vec<u32>,
    pub network: Network,
    pub extras: BTreeMap<String, Tensor>,
}

fn write_tensor<W: Write>(w: &mut W, t: &Tensor) -> Result<(), NnError> {
    w.write_u32::<LittleEndian>(t.ndim() as u32)?;
    for &d in t.shape() {
        w.write_u32::<LittleEndian>(d as u32)?;
    }
    for &v in t.data() {
        w.write_f64::<LittleEndian>(v)?;
    }
    Ok(())
}

fn read_tensor<R: Read>(r: &mut R) -> Result<Tensor, NnError> {
    let ndim = r.read_u32::<LittleEndian>()? as usize;
    if ndim > 8 {
        return Err(NnError::format(format!("implausible tensor rank {ndim}")));
    }
    let mut shape = Vec::with_capacity(ndim);
    for _ in 0..ndim {
        shape.push(r.read_u32::<LittleEndian>()? as usize);
    }
    let len: usize = shape.iter().product();
    let mut data = Vec::with_capacity(len);
    for _ in 0..len {
        data.push(r.read_f64::<LittleEndian>()?);
    }
    Tensor::from_vec(&shape, data)
}

pub fn save_model(path: &Path, model: &ModelFile) -> Result<(), NnError> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MODEL_MAGIC)?;
    w.write_u32::<LittleEndian>(MODEL_VERSION)?;
    w.write_u16::<LittleEndian>(model.arch_kind)?;
    w.write_u32::<LittleEndian>(model.meta.len() as u32)?;
    for &m in &model.meta {
        w.write_u32::<LittleEndian>(m)?;
    }
    w.write_u32::<LittleEndian>(model.network.layers.len() as u32)?;
    for layer in &model.network.layers {
        w.write_u16::<LittleEndian>(layer.kind() as u16)?;
        let state = layer.state();
        w.write_u16::<LittleEndian>(state.len() as u16)?;
        for v in state {
            w.write_f64::<LittleEndian>(v)?;
        }
        let tensors = layer.tensors();
        w.write_u16::<LittleEndian>(tensors.len() as u16)?;
        for t in tensors {
            write_tensor(&mut w, t)?;
        }
    }
    w.write_u32::<LittleEndian>(model.extras.len() as u32)?;
    for (name, tensor) in &model.extras {
        if name.len() > 255 || !name.is_ascii() {
            return Err(NnError::format(format!("bad extra tensor name {name:?}")));
        }
        w.write_u8(name.len() as u8)?;
        w.write_all(name.as_bytes())?;
        write_tensor(&mut w, tensor)?;
    }
    w.flush()?;
    Ok(())
}

pub fn load_model(path: &Path) -> Result<ModelFile, NnError> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 7];
    r.read_exact(&mut magic)?;
    if &magic != MODEL_MAGIC {
        return Err(NnError::format(format!(
            "bad model magic {magic:?}, expected {MODEL_MAGIC:?}"
        )));
    }
    let version = r.read_u32::<LittleEndian>()?;
    if version != MODEL_VERSION {
        return Err(NnError::format(format!(
            "unsupported model version {version}"
        )));
    }
    let arch_kind = r.read_u16::<LittleEndian>()?;
    let meta_len = r.read_u32::<LittleEndian>()? as usize;
    let mut meta = Vec::with_capacity(meta_len);
    for _ in 0..meta_len {
        meta.push(r.read_u32::<LittleEndian>()?);
    }
    let num_layers = r.read_u32::<LittleEndian>()? as usize;
    let mut layers = Vec::with_capacity(num_layers);
    for _ in 0..num_layers {
        let kind = LayerKind::from_code(r.read_u16::<LittleEndian>()?)?;
        let n_state = r.read_u16::<LittleEndian>()? as usize;
        let mut state = Vec::with_capacity(n_state);
        for _ in 0..n_state {
            state.push(r.read_f64::<LittleEndian>()?);
        }
        let n_tensors = r.read_u16::<LittleEndian>()? as usize;
        let mut tensors = Vec::with_capacity(n_tensors);
        for _ in 0..n_tensors {
            tensors.push(read_tensor(&mut r)?);
        }
        layers.push(layer_from_record(kind, &state, tensors)?);
    }
    let num_extras = r.read_u32::<LittleEndian>()? as usize;
    let mut extras = BTreeMap::new();
    for _ in 0..num_extras {
        let name_len = r.read_u8()? as usize;
        let mut name = vec![0u8; name_len];
        r.read_exact(&mut name)?;
        let name = String::from_utf8(name)
            .map_err(|_| NnError::format("non-utf8 extra tensor name"))?;
        extras.insert(name, read_tensor(&mut r)?);
    }
    Ok(ModelFile {
        arch_kind,
        meta,
        network: Network::new(layers),
        extras,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::layers::{Dense, Dropout, Flatten, Layer, MaxPool2d, Relu};

    #[test]
    fn model_round_trips_bitwise() {
        let weight = Tensor::from_vec(&[2, 4], vec![0.1, -0.2, 0.3, 0.4, 1.5, -2.5, 0.0, 9.0])
            .unwrap();
        let bias = Tensor::from_vec(&[2], vec![0.01, -0.02]).unwrap();
        let layers: Vec<Box<dyn Layer>> = vec![
            Box::new(Flatten::new()),
            Box::new(Dense::from_parameters(weight.clone(), bias.clone()).unwrap()),
            Box::new(Relu::new()),
            Box::new(Dropout::new(0.2)),
            Box::new(MaxPool2d::new(2, 1)),
        ];
        let mut extras = BTreeMap::new();
        extras.insert(
            "norm_mean".to_string(),
            Tensor::from_vec(&[3], vec![1.0, 2.0, 3.0]).unwrap(),
        );
        let model = ModelFile {
            arch_kind: 7,
            meta: vec![4, 2],
            network: Network::new(layers),
            extras,
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.thznn");
        save_model(&path, &model).unwrap();
        let back = load_model(&path).unwrap();
        assert_eq!(back.arch_kind, 7);
        assert_eq!(back.meta, vec![4, 2]);
        assert_eq!(back.network.layers.len(), 5);
        assert_eq!(back.network.layers[1].params()[0], &weight);
        assert_eq!(back.network.layers[1].params()[1], &bias);
        assert_eq!(back.network.layers[3].state(), vec![0.2]);
        assert_eq!(back.network.layers[4].state(), vec![2.0, 1.0]);
        assert_eq!(back.extras["norm_mean"].data(), &[1.0, 2.0, 3.0]);
    }

    #[test]
    fn rejects_wrong_magic() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bogus.thznn");
        std::fs::write(&path, b"NOTNN1\0rest").unwrap();
        assert!(matches!(load_model(&path), Err(NnError::Format(_))));
    }
}
