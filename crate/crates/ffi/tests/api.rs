use std::ffi::{CStr, CString};
use std::ptr;

use oksvm_ffi::*;

fn last_error() -> String {
    let p = oksvm_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn generate(n: usize, dim: usize, sep: f64, seed: u64) -> *mut OksvmDataset {
    let mut ds = ptr::null_mut();
    assert_eq!(
        unsafe { oksvm_dataset_generate(n, dim, sep, seed, &mut ds) },
        OksvmStatus::Ok
    );
    assert!(!ds.is_null());
    ds
}

#[test]
fn two_point_svm_through_the_c_abi() {
    let x = [0.0, 1.0];
    let y = [1i8, -1];
    let mut ds = ptr::null_mut();
    unsafe {
        assert_eq!(
            oksvm_dataset_new(x.as_ptr(), 2, 1, y.as_ptr(), &mut ds),
            OksvmStatus::Ok
        );
        assert_eq!(oksvm_dataset_n_samples(ds), 2);
        assert_eq!(oksvm_dataset_n_features(ds), 1);

        let mut model = ptr::null_mut();
        assert_eq!(oksvm_train_svm(ds, 10.0, 1.0, ptr::null(), &mut model), OksvmStatus::Ok);
        assert_eq!(oksvm_model_n_support(model), 2);
        assert_eq!(oksvm_model_gamma(model), 1.0);
        assert_eq!(oksvm_model_c(model), 10.0);
        assert!(oksvm_model_bias(model).abs() < 1e-12);

        let probe = [0.5, -3.0, 4.0];
        let mut scores = [f64::NAN; 3];
        let mut labels = [0i8; 3];
        assert_eq!(
            oksvm_model_decision_values(model, probe.as_ptr(), 3, 1, scores.as_mut_ptr()),
            OksvmStatus::Ok
        );
        assert_eq!(
            oksvm_model_predict(model, probe.as_ptr(), 3, 1, labels.as_mut_ptr()),
            OksvmStatus::Ok
        );
        assert!(scores[0].abs() < 1e-12);
        assert_eq!(labels, [1, 1, -1]);

        oksvm_model_free(model);
        oksvm_dataset_free(ds);
    }
}

#[test]
fn oksvm_report_and_metrics() {
    let ds = generate(80, 2, 1.4, 3);
    let (mut train, mut test) = (ptr::null_mut(), ptr::null_mut());
    unsafe {
        assert_eq!(oksvm_dataset_split(ds, 0.5, 1, &mut train, &mut test), OksvmStatus::Ok);
        assert_eq!(oksvm_dataset_n_samples(train), 40);

        let mut opts = oksvm_options_default();
        assert_eq!(opts.eta0, 0.01);
        assert_eq!(opts.ws_limit, 5);
        opts.gamma0 = 0.5;
        let mut model = ptr::null_mut();
        let mut report = OksvmTrainReport {
            final_gamma: 0.0,
            outer_steps: 0,
            terminated_by: OksvmTermination::None,
            converged: false,
        };
        let status = oksvm_train_oksvm(train, 1.0, &opts, ptr::null(), &mut model, &mut report);
        assert_eq!(status, OksvmStatus::Ok);
        assert_ne!(report.terminated_by, OksvmTermination::None);
        assert_eq!(report.final_gamma, oksvm_model_gamma(model));
        assert!(report.final_gamma > 0.0);

        let mut m = OksvmMetrics::default();
        assert_eq!(oksvm_model_evaluate(model, test, &mut m), OksvmStatus::Ok);
        assert_eq!(m.tp + m.fp + m.tn + m.fn_, 40);
        assert!(m.acc > 0.8, "{m:?}");

        oksvm_model_free(model);
        oksvm_dataset_free(train);
        oksvm_dataset_free(test);
        oksvm_dataset_free(ds);
    }
}

#[test]
fn save_and_load_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = CString::new(dir.path().join("m.txt").to_str().unwrap()).unwrap();
    let ds = generate(30, 3, 1.0, 8);
    unsafe {
        let mut model = ptr::null_mut();
        assert_eq!(oksvm_train_svm(ds, 1.0, 0.4, ptr::null(), &mut model), OksvmStatus::Ok);
        assert_eq!(oksvm_model_save(model, path.as_ptr()), OksvmStatus::Ok);
        let mut back = ptr::null_mut();
        assert_eq!(oksvm_model_load(path.as_ptr(), &mut back), OksvmStatus::Ok);
        assert_eq!(oksvm_model_bias(back), oksvm_model_bias(model));
        assert_eq!(oksvm_model_n_support(back), oksvm_model_n_support(model));
        assert_eq!(oksvm_model_n_features(back), 3);

        let probe = [0.1, 0.2, 0.3, -1.0, 2.0, 0.5];
        let (mut a, mut b) = ([0.0; 2], [0.0; 2]);
        oksvm_model_decision_values(model, probe.as_ptr(), 2, 3, a.as_mut_ptr());
        oksvm_model_decision_values(back, probe.as_ptr(), 2, 3, b.as_mut_ptr());
        assert_eq!(a, b);
        oksvm_model_free(model);
        oksvm_model_free(back);
        oksvm_dataset_free(ds);
    }
}

#[test]
fn csv_loading() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("d.csv");
    std::fs::write(&file, "a,b,y\n1,2,yes\n3,4,no\n5,6,yes\n").unwrap();
    let path = CString::new(file.to_str().unwrap()).unwrap();
    let col = CString::new("y").unwrap();
    let pos = CString::new("yes").unwrap();
    let missing = CString::new("label").unwrap();
    unsafe {
        let mut ds = ptr::null_mut();
        assert_eq!(
            oksvm_dataset_load_csv(path.as_ptr(), col.as_ptr(), pos.as_ptr(), &mut ds),
            OksvmStatus::Ok
        );
        assert_eq!(oksvm_dataset_n_samples(ds), 3);
        assert_eq!(oksvm_dataset_n_features(ds), 2);
        oksvm_dataset_free(ds);

        let mut ds = ptr::null_mut();
        let s = oksvm_dataset_load_csv(path.as_ptr(), missing.as_ptr(), pos.as_ptr(), &mut ds);
        assert_eq!(s, OksvmStatus::InvalidData);
        assert!(last_error().contains("missing label column"));
        assert!(ds.is_null());
    }
}

#[test]
fn error_codes() {
    unsafe {
        let mut ds = ptr::null_mut();
        assert_eq!(
            oksvm_dataset_generate(201, 2, 1.0, 0, &mut ds),
            OksvmStatus::InvalidArgument
        );
        assert!(last_error().contains("even"));
        assert_eq!(
            oksvm_dataset_generate(20, 2, 1.0, 0, ptr::null_mut()),
            OksvmStatus::NullPointer
        );

        let mut model = ptr::null_mut();
        assert_eq!(
            oksvm_train_svm(ptr::null(), 1.0, 1.0, ptr::null(), &mut model),
            OksvmStatus::NullPointer
        );

        let x = [0.0, 1.0, 2.0];
        let y = [1i8, 1, 1];
        assert_eq!(
            oksvm_dataset_new(x.as_ptr(), 3, 1, y.as_ptr(), &mut ds),
            OksvmStatus::Ok
        );
        assert_eq!(
            oksvm_train_svm(ds, 1.0, 1.0, ptr::null(), &mut model),
            OksvmStatus::SingleClass
        );
        assert_eq!(last_error(), "single-class input");
        assert_eq!(
            oksvm_train_svm(ds, 1.0, -1.0, ptr::null(), &mut model),
            OksvmStatus::InvalidArgument
        );
        oksvm_dataset_free(ds);

        let bad = [3i8, 1];
        assert_eq!(
            oksvm_dataset_new(x.as_ptr(), 2, 1, bad.as_ptr(), &mut ds),
            OksvmStatus::InvalidData
        );

        let ok = generate(20, 2, 1.0, 1);
        assert_eq!(oksvm_train_svm(ok, 1.0, 1.0, ptr::null(), &mut model), OksvmStatus::Ok);
        assert!(oksvm_last_error_message().is_null());
        let mut out = [0.0; 1];
        let probe = [0.0; 3];
        let s = oksvm_model_decision_values(model, probe.as_ptr(), 1, 3, out.as_mut_ptr());
        assert_eq!(s, OksvmStatus::DimensionMismatch);
        oksvm_model_free(model);
        oksvm_dataset_free(ok);

        // null handles are tolerated by getters and free
        assert_eq!(oksvm_dataset_n_samples(ptr::null()), 0);
        assert!(oksvm_model_gamma(ptr::null()).is_nan());
        oksvm_model_free(ptr::null_mut());
        oksvm_dataset_free(ptr::null_mut());
    }
}

#[test]
fn header_is_valid_c_and_cpp() {
    let header = concat!(env!("CARGO_MANIFEST_DIR"), "/include/oksvm.h");
    let text = std::fs::read_to_string(header).unwrap();
    for name in [
        "oksvm_train_oksvm",
        "oksvm_model_free",
        "OKSVM_STATUS_SINGLE_CLASS",
        "typedef struct OksvmModel",
    ] {
        assert!(text.contains(name), "header lacks {name}");
    }
    for (compiler, lang) in [("cc", "c"), ("c++", "c++")] {
        let status = std::process::Command::new(compiler)
            .args(["-fsyntax-only", "-Wall", "-Werror", "-x", lang, header])
            .status();
        match status {
            Ok(s) => assert!(s.success(), "{compiler} rejected the header"),
            Err(_) => eprintln!("{compiler} not available; skipping compile check"),
        }
    }
}
