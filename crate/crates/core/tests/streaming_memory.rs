//! Peak heap during a file load stays far below the file size when the
//! index is small, showing the input is streamed rather than slurped.

use std::alloc::{GlobalAlloc, Layout, System};
use std::io::{BufWriter, Write};
use std::sync::atomic::{AtomicUsize, Ordering};

use ftm_core::ingestion::{load_graph, GraphSource};

struct Counting;

static CURRENT: AtomicUsize = AtomicUsize::new(0);
static PEAK: AtomicUsize = AtomicUsize::new(0);

unsafe impl GlobalAlloc for Counting {
    unsafe fn alloc(&self, layout: Layout) -> *mut u8 {
        let p = unsafe { System.alloc(layout) };
        if !p.is_null() {
            let now = CURRENT.fetch_add(layout.size(), Ordering::SeqCst) + layout.size();
            PEAK.fetch_max(now, Ordering::SeqCst);
        }
        p
    }
    unsafe fn dealloc(&self, ptr: *mut u8, layout: Layout) {
        unsafe { System.dealloc(ptr, layout) };
        CURRENT.fetch_sub(layout.size(), Ordering::SeqCst);
    }
}

#[global_allocator]
static GLOBAL: Counting = Counting;

/// `triples` lines over a small vocabulary, each carrying one of a few long
/// literals, so the file is large and the index is small.
fn write_file(path: &std::path::Path, triples: usize) -> u64 {
    let mut out = BufWriter::new(std::fs::File::create(path).unwrap());
    let pads: Vec<String> = (0..4).map(|i| format!("{i}").repeat(900)).collect();
    for i in 0..triples {
        writeln!(
            out,
            "<http://ex.org/s{}> <http://ex.org/p{}> \"{}\" .",
            i % 5000,
            i % 7,
            pads[i % pads.len()]
        )
        .unwrap();
    }
    out.flush().unwrap();
    std::fs::metadata(path).unwrap().len()
}

fn check(triples: usize) {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("big.nt");
    let size = write_file(&path, triples);
    let before = CURRENT.load(Ordering::SeqCst);
    PEAK.store(before, Ordering::SeqCst);
    let kg = load_graph(&GraphSource::file(&path).unwrap(), &[]).unwrap();
    let peak = PEAK.load(Ordering::SeqCst) - before;
    assert!(kg.len() <= triples);
    // index: ~ 5000 subjects × 7 predicates × 4 literals at most, well under the file size
    assert!(
        (peak as u64) < size / 4,
        "peak heap {peak} bytes for a {size}-byte file with {} stored triples",
        kg.len()
    );
}

#[test]
fn load_is_streamed() {
    check(40_000);
}

#[test]
#[ignore = "writes a ~900 MB file; run explicitly"]
fn load_is_streamed_one_million() {
    check(1_000_000);
}
