//! Transaction records, dataset I/O, splitting and synthetic generation.

mod io;
mod record;
mod split;
mod synth;

pub use io::{read_dataset, read_dataset_from, write_jsonl, write_jsonl_to, Format};
pub use record::{Amount, Dataset, Transaction};
pub use split::{split, split_indices};
pub use synth::{generate_synthetic, CategorySpec, SignConstraint, SynthConfig};
