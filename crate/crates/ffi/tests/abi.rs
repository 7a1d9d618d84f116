use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use qsieve_ffi::*;

fn forms_dir() -> CString {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/data/forms");
    CString::new(p.to_str().unwrap()).unwrap()
}

unsafe fn take(s: *mut std::ffi::c_char) -> serde_json::Value {
    assert!(!s.is_null());
    let v = serde_json::from_str(CStr::from_ptr(s).to_str().unwrap()).unwrap();
    qs_string_free(s);
    v
}

unsafe fn last_error() -> String {
    let p = qs_last_error();
    assert!(!p.is_null());
    CStr::from_ptr(p).to_string_lossy().into_owned()
}

#[test]
fn field_lifecycle_and_reports() {
    unsafe {
        let mut f = ptr::null_mut();
        assert_eq!(qs_field_new(6, &mut f), QsStatus::Ok);
        assert!(qs_last_error().is_null());
        let mut d = 0;
        assert_eq!(qs_field_d(f, &mut d), QsStatus::Ok);
        assert_eq!(d, 6);

        let mut s = ptr::null_mut();
        assert_eq!(qs_field_classify_json(f, &mut s), QsStatus::Ok);
        let v = take(s);
        assert_eq!(v["schema_version"], 1);
        assert_eq!(v["kind"], "classify");

        let mut s = ptr::null_mut();
        assert_eq!(qs_field_level_json(f, &mut s), QsStatus::Ok);
        let v = take(s);
        assert_eq!(v["result"]["levels"], serde_json::json!(["768", "1536"]));
        qs_field_free(f);
    }
}

#[test]
fn errors_map_to_status_codes() {
    unsafe {
        let mut f = ptr::null_mut();
        assert_eq!(qs_field_new(12, &mut f), QsStatus::Field);
        assert!(f.is_null());
        assert!(last_error().starts_with("quadfield:"));

        assert_eq!(qs_field_new(6, ptr::null_mut()), QsStatus::NullPointer);
        let mut d = 0;
        assert_eq!(qs_field_d(ptr::null(), &mut d), QsStatus::NullPointer);

        let mut forms = ptr::null_mut();
        let missing = CString::new("/nonexistent/forms.json").unwrap();
        assert_ne!(qs_forms_load(missing.as_ptr(), &mut forms), QsStatus::Ok);
        assert!(forms.is_null());

        let bad = [0xffu8, 0];
        assert_eq!(qs_forms_load(bad.as_ptr().cast(), &mut forms), QsStatus::InvalidUtf8);

        qs_field_free(ptr::null_mut());
        qs_forms_free(ptr::null_mut());
        qs_string_free(ptr::null_mut());
        assert_eq!(qs_forms_len(ptr::null()), 0);
    }
}

#[test]
fn sieve_and_replay() {
    unsafe {
        let mut field = ptr::null_mut();
        assert_eq!(qs_field_new(6, &mut field), QsStatus::Ok);
        let mut forms = ptr::null_mut();
        let dir = forms_dir();
        assert_eq!(qs_forms_load(dir.as_ptr(), &mut forms), QsStatus::Ok);
        assert_eq!(qs_forms_len(forms), 10 + 13 + 4 + 36);

        // aux primes must be coprime to d
        let mut s = ptr::null_mut();
        let aux = [3u64];
        assert_eq!(qs_sieve_json(field, forms, aux.as_ptr(), 1, 20, 100, &mut s), QsStatus::Forms);
        assert!(s.is_null());
        assert!(last_error().starts_with("forms:"));
        qs_forms_free(forms);

        let one = CString::new(PathBuf::from(dir.to_str().unwrap()).join("d6_1536.json").to_str().unwrap()).unwrap();
        assert_eq!(qs_forms_load(one.as_ptr(), &mut forms), QsStatus::Ok);
        let aux = [5u64, 7, 11];
        assert_eq!(qs_sieve_json(field, forms, aux.as_ptr(), aux.len(), 20, 200, &mut s), QsStatus::Ok);
        let v = take(s);
        assert_eq!(v["result"].as_array().unwrap().len(), 13);
        qs_forms_free(forms);
        qs_field_free(field);

        let mut s = ptr::null_mut();
        assert_eq!(qs_replay_json(6, dir.as_ptr(), &mut s), QsStatus::Ok);
        let v = take(s);
        assert_eq!(v["kind"], "replay");
        assert_eq!(v["result"]["conclusion"]["theorem_consistent"], true);

        assert_eq!(qs_replay_json(6, ptr::null(), &mut s), QsStatus::Ok);
        let v = take(s);
        assert_eq!(v["result"]["conclusion"]["sieve_run"], false);
    }
}

#[test]
fn last_error_is_per_thread() {
    unsafe {
        let mut f = ptr::null_mut();
        assert_eq!(qs_field_new(4, &mut f), QsStatus::Field);
        std::thread::spawn(|| assert!(qs_last_error().is_null())).join().unwrap();
        assert!(!qs_last_error().is_null());
    }
}

#[test]
fn header_is_current_and_compiles() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let header = std::fs::read_to_string(dir.join("include/qsieve.h")).unwrap();
    for sym in [
        "qs_last_error",
        "qs_string_free",
        "qs_field_new",
        "qs_field_free",
        "qs_field_d",
        "qs_field_classify_json",
        "qs_field_level_json",
        "qs_forms_load",
        "qs_forms_free",
        "qs_forms_len",
        "qs_sieve_json",
        "qs_replay_json",
        "typedef struct QsField QsField",
        "typedef struct QsForms QsForms",
        "QS_STATUS_OK = 0",
    ] {
        assert!(header.contains(sym), "header lacks {sym}");
    }
    let src = std::env::temp_dir().join(format!("qsieve_header_{}.c", std::process::id()));
    std::fs::write(&src, "#include \"qsieve.h\"\nint main(void) { QsField *f = 0; return qs_field_new(6, &f) == QS_STATUS_OK ? 0 : 1; }\n")
        .unwrap();
    match Command::new("cc")
        .arg("-fsyntax-only")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(dir.join("include"))
        .arg(&src)
        .output()
    {
        Ok(out) => assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr)),
        Err(_) => eprintln!("no C compiler found; header syntax check skipped"),
    }
    let _ = std::fs::remove_file(src);
}
