pub mod rect_oracle;
pub mod tess_writer;
