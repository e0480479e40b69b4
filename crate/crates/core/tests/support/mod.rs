pub mod irls;
pub mod oracle;
