//! The free semigroup on {1,2,3}: words, filtered enumeration, and
//! prefix-minimal extraction.

mod enumerate;
mod filter;
mod minimal;
mod word;

pub use enumerate::{collect_words, count_words, enumerate, EnumStats, SPINE_CLOSE_FACTOR};
pub use filter::{EnumFilter, SIGMA1_PROXY_CONSTANT};
pub use minimal::{is_prefix_free_power, minimal_subset};
pub use word::{word_to_matrix, Word};
