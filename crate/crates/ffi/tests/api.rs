use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use isocircle_ffi::*;

fn disk(w: usize, h: usize, c: (f64, f64, f64)) -> Vec<u8> {
    (0..w * h)
        .map(|i| {
            let (x, y) = ((i % w) as f64, (i / w) as f64);
            if (x - c.0).hypot(y - c.1) <= c.2 { 204 } else { 51 }
        })
        .collect()
}

fn last_error() -> String {
    let p = ic_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn detects_through_handles() {
    let px = disk(160, 120, (80.0, 60.0, 35.0));
    let mut img = ptr::null_mut();
    unsafe {
        assert_eq!(ic_image_from_gray8(160, 120, px.as_ptr(), 0, &mut img), IcStatus::Ok);
        assert_eq!((ic_image_width(img), ic_image_height(img)), (160, 120));

        let mut found = ptr::null_mut();
        assert_eq!(ic_detect(img, ptr::null(), &mut found), IcStatus::Ok);
        assert_eq!(ic_detections_len(found), 1);
        let mut c = std::mem::zeroed::<IcCircle>();
        assert_eq!(ic_detections_get(found, 0, &mut c), IcStatus::Ok);
        assert!((c.a - 80.0).abs() < 1.0 && (c.b - 60.0).abs() < 1.0 && (c.r - 35.0).abs() < 1.0, "{c:?}");
        assert_eq!(c.n_sectors, 16);

        let mut st = IcStats::default();
        assert_eq!(ic_detections_stats(found, &mut st), IcStatus::Ok);
        assert!(st.iterations <= st.budget && st.edge_pixels > 0);
        ic_detections_free(found);
        ic_image_free(img);
    }
}

#[test]
fn strided_rows_match_packed() {
    let (w, h) = (90, 70);
    let packed = disk(w, h, (40.0, 35.0, 20.0));
    let stride = w + 13;
    let mut padded = vec![255u8; stride * h];
    for y in 0..h {
        padded[y * stride..y * stride + w].copy_from_slice(&packed[y * w..(y + 1) * w]);
    }
    unsafe {
        let mut cfg = std::mem::zeroed();
        assert_eq!(ic_config_default(&mut cfg), IcStatus::Ok);
        let run = |data: &[u8], stride: usize| {
            let mut img = ptr::null_mut();
            assert_eq!(ic_image_from_gray8(w, h, data.as_ptr(), stride, &mut img), IcStatus::Ok);
            let mut found = ptr::null_mut();
            assert_eq!(ic_detect(img, &cfg, &mut found), IcStatus::Ok);
            let out: Vec<IcCircle> = (0..ic_detections_len(found))
                .map(|i| {
                    let mut c = std::mem::zeroed();
                    ic_detections_get(found, i, &mut c);
                    c
                })
                .collect();
            ic_detections_free(found);
            ic_image_free(img);
            out
        };
        let a = run(&packed, 0);
        assert_eq!(a.len(), 1);
        assert_eq!(a, run(&padded, stride));
    }
}

#[test]
fn error_codes_and_messages() {
    unsafe {
        let mut img = ptr::null_mut();
        assert_eq!(ic_image_from_gray8(4, 4, ptr::null(), 0, &mut img), IcStatus::NullPointer);
        assert!(last_error().contains("NULL"));
        let px = [0u8; 16];
        assert_eq!(ic_image_from_gray8(4, 4, px.as_ptr(), 2, &mut img), IcStatus::InvalidArgument);

        let missing = CString::new("/nonexistent/dir/x.png").unwrap();
        assert_eq!(ic_image_load(missing.as_ptr(), &mut img), IcStatus::Io);
        assert!(last_error().contains("/nonexistent/dir/x.png"));

        assert_eq!(ic_image_from_gray8(4, 4, px.as_ptr(), 0, &mut img), IcStatus::Ok);
        assert!(ic_last_error_message().is_null());
        let mut cfg = std::mem::zeroed();
        ic_config_default(&mut cfg);
        cfg.ksize = 4;
        let mut found = ptr::null_mut();
        assert_eq!(ic_detect(img, &cfg, &mut found), IcStatus::InvalidArgument);
        assert!(found.is_null());
        assert_eq!(ic_detect(ptr::null(), &cfg, &mut found), IcStatus::NullPointer);
        ic_image_free(img);

        assert_eq!(ic_detections_len(ptr::null()), 0);
        ic_detections_free(ptr::null_mut());
        ic_image_free(ptr::null_mut());
        assert_eq!(ic_config_default(ptr::null_mut()), IcStatus::NullPointer);
    }
}

#[test]
fn loads_image_files() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.pgm");
    let px = disk(64, 64, (32.0, 32.0, 18.0));
    let mut pgm = b"P5\n64 64\n255\n".to_vec();
    pgm.extend_from_slice(&px);
    std::fs::write(&path, pgm).unwrap();
    let cpath = CString::new(path.to_str().unwrap()).unwrap();
    unsafe {
        let mut img = ptr::null_mut();
        assert_eq!(ic_image_load(cpath.as_ptr(), &mut img), IcStatus::Ok);
        assert_eq!(ic_image_width(img), 64);
        let mut found = ptr::null_mut();
        assert_eq!(ic_detect(img, ptr::null(), &mut found), IcStatus::Ok);
        assert_eq!(ic_detections_len(found), 1);
        ic_detections_free(found);
        ic_image_free(img);
    }
}

fn target_dir() -> PathBuf {
    // tests run from target/<profile>/deps
    std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf()
}

#[test]
fn c_program_links_against_header() {
    let manifest = Path::new(env!("CARGO_MANIFEST_DIR"));
    let lib = target_dir().join("libisocircle_ffi.a");
    if !lib.exists() || Command::new("cc").arg("--version").output().is_err() {
        eprintln!("skipping: no C compiler or static library at {}", lib.display());
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let exe = dir.path().join("smoke");
    let status = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-I"])
        .arg(manifest.join("include"))
        .arg(manifest.join("tests/c/smoke.c"))
        .arg(&lib)
        .args(["-lm", "-lpthread", "-ldl", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "exit {:?}", out.status.code());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("64.") || text.starts_with("63."), "{text}");
}
