pub use cocon;
