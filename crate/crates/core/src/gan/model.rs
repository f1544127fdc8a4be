use alloc::vec::Vec;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::invalid;
use crate::numerics::{Activation, Matrix, MlpParams};
use crate::synth::PointSet;
use crate::{seed, Error, Result};

/// Dense generator and discriminator layout.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields, default))]
pub struct GanArchitecture {
    pub noise_dim: usize,
    pub data_dim: usize,
    pub generator_hidden: Vec<usize>,
    pub discriminator_hidden: Vec<usize>,
    pub generator_activation: Activation,
    pub discriminator_activation: Activation,
    /// Standard deviation of the normal weight initialization.
    pub init_std: f64,
}

impl Default for GanArchitecture {
    fn default() -> Self {
        Self {
            noise_dim: 2,
            data_dim: 2,
            generator_hidden: alloc::vec![64, 64],
            discriminator_hidden: alloc::vec![64, 64],
            generator_activation: Activation::Relu,
            discriminator_activation: Activation::LeakyRelu(0.2),
            init_std: 0.02,
        }
    }
}

impl GanArchitecture {
    fn dims(input: usize, hidden: &[usize], output: usize) -> Vec<usize> {
        let mut d = Vec::with_capacity(hidden.len() + 2);
        d.push(input);
        d.extend_from_slice(hidden);
        d.push(output);
        d
    }

    fn activations(hidden: &[usize], act: Activation, last: Activation) -> Vec<Activation> {
        let mut a = alloc::vec![act; hidden.len()];
        a.push(last);
        a
    }

    pub fn validate(&self) -> Result<()> {
        if self.noise_dim == 0 || self.data_dim == 0 {
            return Err(invalid("noise and data dimensions must be positive"));
        }
        if !(self.init_std >= 0.0 && self.init_std.is_finite()) {
            return Err(invalid("init_std must be finite and non-negative"));
        }
        Ok(())
    }

    /// Initializes a generator (identity output) and a discriminator (sigmoid output).
    pub fn init(&self, seed: u64) -> Result<(MlpParams, MlpParams)> {
        self.validate()?;
        let mut rng = seed::rng(seed);
        let generator = MlpParams::init(
            &Self::dims(self.noise_dim, &self.generator_hidden, self.data_dim),
            &Self::activations(&self.generator_hidden, self.generator_activation, Activation::Identity),
            self.init_std,
            &mut rng,
        )?;
        let discriminator = MlpParams::init(
            &Self::dims(self.data_dim, &self.discriminator_hidden, 1),
            &Self::activations(
                &self.discriminator_hidden,
                self.discriminator_activation,
                Activation::Sigmoid,
            ),
            self.init_std,
            &mut rng,
        )?;
        Ok((generator, discriminator))
    }
}

/// A generator/discriminator pair plus training metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct GanModel {
    generator: MlpParams,
    discriminator: MlpParams,
    noise_dim: usize,
    epochs_trained: usize,
    init_seed: u64,
}

impl GanModel {
    /// Freshly initialized, untrained model.
    pub fn init(arch: &GanArchitecture, init_seed: u64) -> Result<Self> {
        let (generator, discriminator) = arch.init(init_seed)?;
        Self::from_parts(generator, discriminator, 0, init_seed)
    }

    /// Checks that the generator feeds the discriminator and the
    /// discriminator ends in a single sigmoid unit.
    pub fn from_parts(
        generator: MlpParams,
        discriminator: MlpParams,
        epochs_trained: usize,
        init_seed: u64,
    ) -> Result<Self> {
        if generator.output_dim() != discriminator.input_dim() {
            return Err(Error::Shape {
                context: "generator output vs discriminator input",
                expected: discriminator.input_dim(),
                found: generator.output_dim(),
            });
        }
        let last = discriminator.layers().last().expect("non-empty");
        if discriminator.output_dim() != 1 || last.activation() != Activation::Sigmoid {
            return Err(invalid("discriminator must end in a single sigmoid unit"));
        }
        Ok(Self {
            noise_dim: generator.input_dim(),
            generator,
            discriminator,
            epochs_trained,
            init_seed,
        })
    }

    pub fn generator(&self) -> &MlpParams {
        &self.generator
    }

    pub fn discriminator(&self) -> &MlpParams {
        &self.discriminator
    }

    pub(crate) fn nets_mut(&mut self) -> (&mut MlpParams, &mut MlpParams) {
        (&mut self.generator, &mut self.discriminator)
    }

    pub fn noise_dim(&self) -> usize {
        self.noise_dim
    }

    pub fn data_dim(&self) -> usize {
        self.generator.output_dim()
    }

    pub fn epochs_trained(&self) -> usize {
        self.epochs_trained
    }

    pub(crate) fn set_epochs_trained(&mut self, e: usize) {
        self.epochs_trained = e;
    }

    pub fn init_seed(&self) -> u64 {
        self.init_seed
    }
}

pub(crate) fn noise<R: Rng + ?Sized>(rng: &mut R, n: usize, dim: usize) -> Matrix {
    let data = (0..n * dim).map(|_| rng.sample(StandardNormal)).collect();
    Matrix::new(n, dim, data).expect("sized above")
}

/// `n` samples `G(z)` with `z ~ N(0, I)` drawn from `seed`.
pub fn generate_from(generator: &MlpParams, n: usize, seed: u64) -> Result<PointSet> {
    if n == 0 {
        return Err(Error::Empty("sample count"));
    }
    let z = noise(&mut seed::rng(seed), n, generator.input_dim());
    Ok(PointSet::new(generator.predict(&z)?))
}

pub fn generate(model: &GanModel, n: usize, seed: u64) -> Result<PointSet> {
    generate_from(&model.generator, n, seed)
}

/// `D(x)` for every point.
pub fn discriminator_score(model: &GanModel, points: &PointSet) -> Result<Vec<f64>> {
    Ok(model.discriminator.predict(points.points())?.into_vec())
}
