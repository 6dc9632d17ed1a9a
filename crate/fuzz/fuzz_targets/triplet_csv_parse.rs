#![no_main]

use bose_chaos::matrix::SymmetricMatrix;
use libfuzzer_sys::fuzz_target;

fn parse(data: &[u8]) -> bose_chaos::Result<SymmetricMatrix> {
    SymmetricMatrix::read_csv(data)
}

fuzz_target!(|data: &[u8]| {
    let _ = parse(data);
});
