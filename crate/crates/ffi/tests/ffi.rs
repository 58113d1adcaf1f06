use std::ffi::CString;
use std::ptr;

use spbm_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0u8; 256];
    let n = unsafe { spbm_last_error(buf.as_mut_ptr().cast(), buf.len()) };
    buf.truncate(n.min(255));
    String::from_utf8(buf).unwrap()
}

const LO: [f64; 2] = [0.0, 0.0];
const HI: [f64; 2] = [1.0, 1.0];

fn two_balls() -> *mut SpbmProcess {
    let centers = [0.25, 0.5, 0.75, 0.5];
    let marks = [1.0, 1.0];
    let mut p = ptr::null_mut();
    let s = unsafe { spbm_process_from_points(2, centers.as_ptr(), marks.as_ptr(), 2, &mut p) };
    assert_eq!(s, SpbmStatus::Ok);
    assert!(!p.is_null());
    p
}

#[test]
fn coverage_through_the_handle() {
    let p = two_balls();
    let (mut covered, mut reliable) = (true, false);
    let s = unsafe { spbm_is_covered(p, 0.5, LO.as_ptr(), HI.as_ptr(), 1, &mut covered, &mut reliable) };
    assert_eq!(s, SpbmStatus::Ok);
    assert!(!covered && reliable);

    let mut r = 0.0;
    assert_eq!(unsafe { spbm_coverage_threshold(p, LO.as_ptr(), HI.as_ptr(), 1, 1e-9, &mut r) }, SpbmStatus::Ok);
    assert!((r - 5f64.sqrt() / 4.0).abs() < 1e-8);

    let lo = [-2.0, -2.0];
    let hi = [2.0, 2.0];
    let centers = [0.0, 0.0, 1.0, 0.0];
    let mut q = ptr::null_mut();
    unsafe { spbm_process_from_points(2, centers.as_ptr(), [1.0, 1.0].as_ptr(), 2, &mut q) };
    let (mut n, mut deg) = (9, 9);
    assert_eq!(unsafe { spbm_count_witnesses(q, 1.0, lo.as_ptr(), hi.as_ptr(), 1, &mut n, &mut deg) }, SpbmStatus::Ok);
    assert_eq!((n, deg), (1, 0));
    unsafe {
        spbm_process_free(p);
        spbm_process_free(q);
        spbm_process_free(ptr::null_mut());
    }
}

#[test]
fn errors_map_to_codes() {
    let p = two_balls();
    let mut r = 0.0;
    let s = unsafe { spbm_coverage_threshold(p, LO.as_ptr(), HI.as_ptr(), 3, 1e-9, &mut r) };
    assert_eq!(s, SpbmStatus::Uncoverable);
    assert!(last_error().contains("cannot be 3-covered"), "{}", last_error());
    assert_eq!(r, 0.0);

    let s = unsafe { spbm_coverage_threshold(ptr::null(), LO.as_ptr(), HI.as_ptr(), 1, 1e-9, &mut r) };
    assert_eq!(s, SpbmStatus::NullPointer);

    let mut q = ptr::null_mut();
    let s = unsafe { spbm_process_from_points(4, ptr::null(), ptr::null(), 0, &mut q) };
    assert_eq!(s, SpbmStatus::UnsupportedDimension);
    assert!(q.is_null());

    let bad = CString::new("gauss:1").unwrap();
    let mut c = SpbmConstants::default();
    assert_eq!(unsafe { spbm_constants(2, 1, bad.as_ptr(), &mut c) }, SpbmStatus::InvalidArgument);
    unsafe { spbm_process_free(p) };
}

#[test]
fn sampling_and_constants() {
    let law = CString::new("det:1").unwrap();
    let mut c = SpbmConstants::default();
    assert_eq!(unsafe { spbm_constants(3, 1, law.as_ptr(), &mut c) }, SpbmStatus::Ok);
    assert!((c.c_dky - 3.0 * std::f64::consts::PI.powi(2) / 32.0).abs() < 1e-12);

    let mut r = 0.0;
    let s = unsafe { spbm_scaling_radius(std::f64::consts::E, 2, 1, 0.0, SpbmVariant::HallJanson as u32, law.as_ptr(), &mut r) };
    assert_eq!(s, SpbmStatus::Ok);
    assert!((r - 0.342198).abs() < 1e-6);
    assert_eq!(
        unsafe { spbm_scaling_radius(10.0, 2, 1, 0.0, 7, law.as_ptr(), &mut r) },
        SpbmStatus::InvalidArgument
    );

    let (lo, hi) = ([0.0; 3], [1.0; 3]);
    let sample = || {
        let mut p = ptr::null_mut();
        let s = unsafe { spbm_process_sample(3, lo.as_ptr(), hi.as_ptr(), 200.0, law.as_ptr(), 0.2, 11, 2, &mut p) };
        assert_eq!(s, SpbmStatus::Ok);
        let (mut n, mut d) = (0, 0);
        unsafe { spbm_process_len(p, &mut n, &mut d) };
        unsafe { spbm_process_free(p) };
        (n, d)
    };
    let a = sample();
    assert_eq!(a, sample());
    assert_eq!(a.1, 3);
    assert!(a.0 > 200);
}

#[test]
fn header_is_generated() {
    let h = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/spbm.h")).unwrap();
    for name in [
        "spbm_process_from_points",
        "spbm_process_sample",
        "spbm_process_free",
        "spbm_is_covered",
        "spbm_coverage_threshold",
        "spbm_count_witnesses",
        "spbm_constants",
        "spbm_scaling_radius",
        "spbm_last_error",
        "typedef struct SpbmProcess SpbmProcess;",
        "SPBM_STATUS_UNCOVERABLE = 4",
    ] {
        assert!(h.contains(name), "{name} missing from header");
    }
}

#[test]
fn header_compiles_as_c() {
    let Ok(cc) = std::env::var("CC").or_else(|_| which("cc")) else {
        eprintln!("no C compiler found; skipping");
        return;
    };
    let dir = tempfile_dir();
    let src = dir.join("use_header.c");
    std::fs::write(
        &src,
        "#include \"spbm.h\"\nint main(void) { SpbmProcess *p = 0; spbm_process_free(p); return SPBM_STATUS_OK; }\n",
    )
    .unwrap();
    let status = std::process::Command::new(cc)
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(concat!(env!("CARGO_MANIFEST_DIR"), "/include"))
        .arg(&src)
        .status()
        .unwrap();
    assert!(status.success());
}

fn which(name: &str) -> Result<String, ()> {
    std::env::var_os("PATH")
        .and_then(|paths| std::env::split_paths(&paths).map(|p| p.join(name)).find(|p| p.is_file()))
        .map(|p| p.display().to_string())
        .ok_or(())
}

fn tempfile_dir() -> std::path::PathBuf {
    let d = std::env::temp_dir().join(format!("spbm-ffi-{}", std::process::id()));
    std::fs::create_dir_all(&d).unwrap();
    d
}
