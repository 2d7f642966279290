use std::ffi::{CStr, CString};
use std::ptr;

use irs_outage_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(irs_last_error_message()) }
        .to_string_lossy()
        .into_owned()
}

fn desk_params() -> IrsSystemParams {
    IrsSystemParams {
        power: 1.0,
        noise: 1e-4,
        gamma: 3.0,
        margin_scale: 0.0,
    }
}

fn small_config() -> IrsSolverConfig {
    let mut cfg = unsafe {
        let mut c = std::mem::zeroed();
        assert_eq!(irs_solver_config_desk(&mut c), IrsStatus::Ok);
        c
    };
    cfg.max_outer = 5;
    cfg.max_inner = 50;
    cfg
}

fn generate(m: usize, n: usize, t: usize, seed: u64) -> *mut IrsSampleSet {
    let mut set = ptr::null_mut();
    assert_eq!(
        unsafe { irs_sample_set_generate(m, n, t, seed, &mut set) },
        IrsStatus::Ok
    );
    assert!(!set.is_null());
    set
}

#[test]
fn version_is_a_c_string() {
    let v = unsafe { CStr::from_ptr(irs_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn defaults_match_the_library() {
    let mut c = unsafe { std::mem::zeroed::<IrsSolverConfig>() };
    assert_eq!(unsafe { irs_solver_config_default(&mut c) }, IrsStatus::Ok);
    assert_eq!((c.max_outer, c.max_inner), (1000, 5000));
    assert_eq!(c.decay_per_inner, 0);
    assert_eq!(
        unsafe { irs_solver_config_default(ptr::null_mut()) },
        IrsStatus::NullPointer
    );
}

#[test]
fn generate_save_load_round_trip() {
    let set = generate(3, 4, 12, 21);
    let dir = tempfile::tempdir().unwrap();
    let path = CString::new(dir.path().join("s.irss").to_str().unwrap()).unwrap();
    unsafe {
        assert_eq!(irs_sample_set_save(set, path.as_ptr()), IrsStatus::Ok);
        let mut loaded = ptr::null_mut();
        assert_eq!(
            irs_sample_set_load(path.as_ptr(), &mut loaded),
            IrsStatus::Ok
        );
        let (mut m, mut n, mut t) = (0, 0, 0);
        assert_eq!(
            irs_sample_set_dims(loaded, &mut m, &mut n, &mut t),
            IrsStatus::Ok
        );
        assert_eq!((m, n, t), (3, 4, 12));
        irs_sample_set_free(loaded);
        irs_sample_set_free(set);
    }
}

#[test]
fn load_errors_carry_status_and_message() {
    let missing = CString::new("/no/such/dir/set.irss").unwrap();
    let mut out = ptr::null_mut();
    let status = unsafe { irs_sample_set_load(missing.as_ptr(), &mut out) };
    assert_eq!(status, IrsStatus::Io);
    assert!(out.is_null());
    assert!(last_error().contains("/no/such/dir/set.irss"));

    let dir = tempfile::tempdir().unwrap();
    let junk = dir.path().join("junk.irss");
    std::fs::write(&junk, b"not a sample set").unwrap();
    let junk = CString::new(junk.to_str().unwrap()).unwrap();
    let status = unsafe { irs_sample_set_load(junk.as_ptr(), &mut out) };
    assert_eq!(status, IrsStatus::MalformedFile);
}

#[test]
fn solve_and_copy_out() {
    let set = generate(4, 8, 30, 3);
    let params = desk_params();
    let cfg = small_config();
    unsafe {
        let mut result = ptr::null_mut();
        let status = irs_solve(set, &params, &cfg, IrsMethod::Proposed, 11, &mut result);
        assert_eq!(status, IrsStatus::Ok, "{}", last_error());
        let (mut m, mut n) = (0, 0);
        assert_eq!(irs_result_dims(result, &mut m, &mut n), IrsStatus::Ok);
        assert_eq!((m, n), (4, 8));

        let (mut w_re, mut w_im) = (vec![0.0; m], vec![0.0; m]);
        assert_eq!(
            irs_result_w(result, w_re.as_mut_ptr(), w_im.as_mut_ptr(), m),
            IrsStatus::Ok
        );
        let power: f64 = w_re.iter().chain(&w_im).map(|x| x * x).sum();
        assert!(power <= params.power + 1e-9);

        let (mut v_re, mut v_im) = (vec![0.0; n], vec![0.0; n]);
        assert_eq!(
            irs_result_v(result, v_re.as_mut_ptr(), v_im.as_mut_ptr(), n),
            IrsStatus::Ok
        );
        for (a, b) in v_re.iter().zip(&v_im) {
            assert!(((a * a + b * b).sqrt() - 1.0).abs() < 1e-9);
        }
        assert_eq!(
            irs_result_v(result, v_re.as_mut_ptr(), v_im.as_mut_ptr(), n - 1),
            IrsStatus::BufferTooSmall
        );

        let mut on_train = -1.0;
        assert_eq!(irs_result_outage(result, &mut on_train), IrsStatus::Ok);
        let mut scored = -1.0;
        let status = irs_empirical_outage(
            set,
            &params,
            w_re.as_ptr(),
            w_im.as_ptr(),
            m,
            v_re.as_ptr(),
            v_im.as_ptr(),
            n,
            &mut scored,
        );
        assert_eq!(status, IrsStatus::Ok, "{}", last_error());
        assert_eq!(scored, on_train);
        irs_result_free(result);
        irs_sample_set_free(set);
    }
}

#[test]
fn no_irs_result_has_empty_v() {
    let set = generate(3, 5, 20, 4);
    unsafe {
        let mut result = ptr::null_mut();
        let status = irs_solve(
            set,
            &desk_params(),
            &small_config(),
            IrsMethod::NoIrs,
            1,
            &mut result,
        );
        assert_eq!(status, IrsStatus::Ok, "{}", last_error());
        let mut n = 99;
        irs_result_dims(result, ptr::null_mut(), &mut n);
        assert_eq!(n, 0);
        assert_eq!(
            irs_result_v(result, ptr::null_mut(), ptr::null_mut(), 0),
            IrsStatus::Ok
        );
        irs_result_free(result);
        irs_sample_set_free(set);
    }
}

#[test]
fn invalid_inputs_are_reported() {
    let set = generate(2, 2, 5, 5);
    unsafe {
        let mut result = ptr::null_mut();
        let mut bad = desk_params();
        bad.noise = -1.0;
        let status = irs_solve(
            set,
            &bad,
            &small_config(),
            IrsMethod::Proposed,
            0,
            &mut result,
        );
        assert_eq!(status, IrsStatus::InvalidArgument);
        assert!(result.is_null());
        assert!(!last_error().is_empty());

        let status = irs_solve(
            ptr::null(),
            &desk_params(),
            &small_config(),
            IrsMethod::Proposed,
            0,
            &mut result,
        );
        assert_eq!(status, IrsStatus::NullPointer);

        let w_re = [2.0, 0.0];
        let w_im = [0.0, 0.0];
        let mut out = 0.0;
        let status = irs_empirical_outage(
            set,
            &desk_params(),
            w_re.as_ptr(),
            w_im.as_ptr(),
            2,
            ptr::null(),
            ptr::null(),
            0,
            &mut out,
        );
        assert_eq!(status, IrsStatus::Infeasible);

        let mut empty = ptr::null_mut();
        assert_eq!(
            irs_sample_set_generate(0, 2, 5, 1, &mut empty),
            IrsStatus::DimensionMismatch
        );
        irs_sample_set_free(set);
        irs_sample_set_free(ptr::null_mut());
        irs_result_free(ptr::null_mut());
    }
}

#[test]
fn header_is_generated_and_declares_the_api() {
    let header = include_str!("../include/irs_outage.h");
    for name in [
        "irs_sample_set_generate",
        "irs_sample_set_free",
        "irs_solve",
        "irs_result_w",
        "irs_last_error_message",
        "IRS_STATUS_OK",
        "typedef struct IrsSampleSet IrsSampleSet",
    ] {
        assert!(header.contains(name), "missing {name}");
    }
}

#[test]
fn header_compiles_as_c() {
    let Ok(cc) = std::process::Command::new("cc").arg("--version").output() else {
        eprintln!("no C compiler on PATH; skipping");
        return;
    };
    assert!(cc.status.success());
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("use.c");
    std::fs::write(
        &src,
        "#include \"irs_outage.h\"\n\
         int check(void) {\n\
           IrsSampleSet *set = 0;\n\
           IrsStatus s = irs_sample_set_generate(2, 2, 4, 1, &set);\n\
           irs_sample_set_free(set);\n\
           return s == IRS_STATUS_OK ? 0 : 1;\n\
         }\n",
    )
    .unwrap();
    let include = concat!(env!("CARGO_MANIFEST_DIR"), "/include");
    let out = std::process::Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I", include])
        .arg(&src)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
