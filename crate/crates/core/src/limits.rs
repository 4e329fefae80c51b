/// Enumeration caps. Every exhaustive step in the crate checks one of these
/// before allocating.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    /// Largest block count for which all `2^blocks` elements are enumerated
    /// (distances, best approximation, set-function tables).
    pub max_enum_blocks: usize,
    /// Largest combined element count of the two algebras handed to the chain
    /// functional.
    pub max_chain_elements: usize,
    /// Largest block count on which the extension-quality parameter is
    /// computed exactly.
    pub max_exact_blocks: usize,
    /// Largest number of vertices a single enumeration may hold at once.
    pub max_vertices: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_enum_blocks: 16,
            max_chain_elements: 1 << 13,
            max_exact_blocks: 4,
            max_vertices: 200_000,
        }
    }
}
