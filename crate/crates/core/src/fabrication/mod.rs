//! Seeded fabrication randomness, device carving and noisy readout.

mod challenge;
mod chip;
mod device;
mod noise;

pub use challenge::{Challenge, CHALLENGE_BITS, CHALLENGE_LEVELS};
pub use chip::{
    fabricate_chip, ground_loop_kappa, ChipFingerprint, ChipLayout, FabricationParams, GroundLoop, HeaterParams,
    MziParams, CHIP_FORMAT_VERSION, NOMINAL_V2PI,
};
pub use device::{
    carve_device, overlap_count, CarvingPreset, DeviceInstance, DeviceSpec, PresetCarving, DEVICE_FORMAT_VERSION,
};
pub use noise::{measure, measure_samples, NoiseConfig, NoiseSource, RawResponse};
