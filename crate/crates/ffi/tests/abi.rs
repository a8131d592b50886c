// SPDX-License-Identifier: Apache-2.0

use std::ffi::{CStr, CString};
use std::ptr;

use resume_forge::data::{two_gaussians, write_dataset};
use resume_forge_ffi::*;

fn last_error() -> String {
    let p = rf_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn cstr(s: &str) -> CString {
    CString::new(s).unwrap()
}

/// Trains a tiny run into `dir/store` and returns the config path.
fn tiny_run(dir: &std::path::Path) -> CString {
    let data = dir.join("data.csv");
    write_dataset(&two_gaussians(32, 3), &data).unwrap();
    let config = dir.join("run.conf");
    std::fs::write(
        &config,
        format!(
            "data = {}\n[optimizer]\nepochs = 2\nbatch_size = 8\n[checkpoint]\ninterval = 3\n[backend]\nstore = {}\n",
            data.display(),
            dir.join("store").display()
        ),
    )
    .unwrap();
    cstr(config.to_str().unwrap())
}

#[test]
fn version_is_a_c_string() {
    let v = unsafe { CStr::from_ptr(rf_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn loss_matches_rust_api() {
    let (p, t) = ([0.2, 0.7, 0.1], [0.0, 1.0, 0.0]);
    let mut v = 0.0;
    let name = cstr("cross_entropy");
    let status = unsafe { rf_loss_eval(name.as_ptr(), 0.0, p.as_ptr(), t.as_ptr(), 3, &mut v) };
    assert_eq!(status, RfStatus::Ok);
    assert_eq!(v.to_bits(), (-(0.7f64).ln()).to_bits());

    let mut g = [0.0; 3];
    let status = unsafe { rf_loss_gradient(name.as_ptr(), 0.0, p.as_ptr(), t.as_ptr(), 3, g.as_mut_ptr()) };
    assert_eq!(status, RfStatus::Ok);
    assert_eq!(g[1], -1.0 / 0.7);

    let huber = cstr("huber");
    let status = unsafe { rf_loss_eval(huber.as_ptr(), 0.5, [3.0].as_ptr(), [0.0].as_ptr(), 1, &mut v) };
    assert_eq!(status, RfStatus::Ok);
    assert_eq!(v, 0.5 * (3.0 - 0.25));
}

#[test]
fn bad_arguments_set_status_and_message() {
    let mut v = 0.0;
    let bogus = cstr("cosine");
    let status = unsafe { rf_loss_eval(bogus.as_ptr(), 0.0, [0.0].as_ptr(), [0.0].as_ptr(), 1, &mut v) };
    assert_eq!(status, RfStatus::InvalidArgument);
    assert!(last_error().contains("cosine"));

    let status = unsafe { rf_loss_eval(ptr::null(), 0.0, [0.0].as_ptr(), [0.0].as_ptr(), 1, &mut v) };
    assert_eq!(status, RfStatus::NullArgument);

    let mut verdict = RfVerdict::Valid;
    assert_eq!(unsafe { rf_verify(ptr::null(), 4, &mut verdict) }, RfStatus::NullArgument);
    assert_eq!(unsafe { rf_verify(b"ILCK".as_ptr(), 4, &mut verdict) }, RfStatus::Ok);
    assert_eq!(verdict, RfVerdict::Truncated);
    assert_eq!(unsafe { rf_verify(b"nope-nope-nope-nope".as_ptr(), 19, &mut verdict) }, RfStatus::Ok);
    assert_eq!(verdict, RfVerdict::BadMagic);

    let mut cp = ptr::null_mut();
    assert_eq!(unsafe { rf_checkpoint_decode(b"ILCK".as_ptr(), 4, &mut cp) }, RfStatus::Corrupt);
    assert!(cp.is_null());
    unsafe { rf_checkpoint_free(ptr::null_mut()) };
}

#[test]
fn train_resume_and_read_back() {
    let dir = tempfile::tempdir().unwrap();
    let config = tiny_run(dir.path());

    let mut report = ptr::null_mut();
    assert_eq!(unsafe { rf_train(config.as_ptr(), ptr::null(), false, &mut report) }, RfStatus::Ok, "{}", last_error());
    let (mut epochs, mut step, mut written) = (0, 0, 0);
    let (mut loss, mut acc) = (0.0, 0.0);
    unsafe {
        assert_eq!(rf_report_progress(report, &mut epochs, &mut step), RfStatus::Ok);
        assert_eq!(rf_report_metrics(report, &mut loss, &mut acc), RfStatus::Ok);
        assert_eq!(rf_report_checkpoints(report, &mut written), RfStatus::Ok);
        rf_report_free(report);
    }
    assert_eq!((epochs, step), (2, 8));
    assert!(written >= 3 && loss.is_finite() && (0.0..=1.0).contains(&acc));

    // resuming a finished run is a no-op that reports the same position
    let mut again = ptr::null_mut();
    assert_eq!(unsafe { rf_train(config.as_ptr(), ptr::null(), true, &mut again) }, RfStatus::Ok);
    unsafe {
        rf_report_progress(again, ptr::null_mut(), &mut step);
        rf_report_free(again);
    }
    assert_eq!(step, 8);

    let root = cstr(dir.path().join("store").to_str().unwrap());
    let mut store = ptr::null_mut();
    assert_eq!(unsafe { rf_store_open_local(root.as_ptr(), &mut store) }, RfStatus::Ok);
    let mut len = 0;
    assert_eq!(unsafe { rf_store_get(store, RfRole::Latest, ptr::null_mut(), 0, &mut len) }, RfStatus::BufferTooSmall);
    let mut buf = vec![0u8; len];
    assert_eq!(unsafe { rf_store_get(store, RfRole::Latest, buf.as_mut_ptr(), buf.len(), &mut len) }, RfStatus::Ok);

    let mut cp = ptr::null_mut();
    assert_eq!(unsafe { rf_checkpoint_decode(buf.as_ptr(), len, &mut cp) }, RfStatus::Ok);
    let (mut epoch, mut global, mut in_epoch) = (0, 0, 0);
    let (mut metric, mut best_epoch) = (0.0, 0);
    unsafe {
        assert_eq!(rf_checkpoint_progress(cp, &mut epoch, &mut global, &mut in_epoch), RfStatus::Ok);
        assert_eq!(rf_checkpoint_best(cp, &mut metric, &mut best_epoch), RfStatus::Ok);
    }
    assert_eq!((epoch, global, in_epoch), (2, 8, 0));
    assert!(metric.is_finite() && best_epoch >= 1);

    // re-encoding gives the stored bytes back, and a put makes a new generation
    let mut out = vec![0u8; len];
    let mut out_len = 0;
    assert_eq!(unsafe { rf_checkpoint_encode(cp, out.as_mut_ptr(), out.len(), &mut out_len) }, RfStatus::Ok);
    assert_eq!(out_len, len);
    let mut generation = 0;
    assert_eq!(unsafe { rf_store_put(store, RfRole::Latest, out.as_ptr(), out_len, &mut generation) }, RfStatus::Ok);
    assert!(generation > 1);
    unsafe {
        rf_checkpoint_free(cp);
        rf_store_free(store);
    }
}

#[test]
fn resume_without_checkpoint_is_not_found() {
    let dir = tempfile::tempdir().unwrap();
    let config = tiny_run(dir.path());
    let mut report = ptr::null_mut();
    assert_eq!(unsafe { rf_train(config.as_ptr(), ptr::null(), true, &mut report) }, RfStatus::NotFound);
    assert!(report.is_null());
    assert!(!last_error().is_empty());
}

#[test]
fn checkpoint_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let config = tiny_run(dir.path());
    let mut report = ptr::null_mut();
    assert_eq!(unsafe { rf_train(config.as_ptr(), ptr::null(), false, &mut report) }, RfStatus::Ok);
    unsafe { rf_report_free(report) };
    let file = std::fs::read_dir(dir.path().join("store"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .find(|p| p.extension().is_some_and(|e| e == "ilck"))
        .unwrap();
    let path = cstr(file.to_str().unwrap());
    let mut cp = ptr::null_mut();
    assert_eq!(unsafe { rf_checkpoint_read_file(path.as_ptr(), &mut cp) }, RfStatus::Ok);
    unsafe { rf_checkpoint_free(cp) };

    let missing = cstr(dir.path().join("absent.ilck").to_str().unwrap());
    assert_eq!(unsafe { rf_checkpoint_read_file(missing.as_ptr(), &mut cp) }, RfStatus::Io);
}
