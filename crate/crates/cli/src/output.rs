use serde_json::{Map, Value};

/// One cell per value: rationals as "a/b", complex numbers as "re+im i",
/// other nested values as compact JSON.
fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        Value::Number(n) => n.to_string(),
        Value::Bool(b) => b.to_string(),
        Value::Object(m) if m.contains_key("num") && m.contains_key("den") => {
            let part = |k: &str| match &m[k] {
                Value::String(s) => s.clone(),
                other => other.to_string(),
            };
            let (num, den) = (part("num"), part("den"));
            if den == "1" {
                num
            } else {
                format!("{num}/{den}")
            }
        }
        Value::Object(m) if m.len() == 2 && m.contains_key("re") && m.contains_key("im") => {
            let (re, im) = (cell(&m["re"]), cell(&m["im"]));
            if im.starts_with('-') {
                format!("{re}{im}i")
            } else {
                format!("{re}+{im}i")
            }
        }
        other => other.to_string(),
    }
}

/// Header is the union of row keys in first-seen order.
pub fn to_csv(rows: &[Map<String, Value>]) -> Result<String, csv::Error> {
    let mut header: Vec<&str> = Vec::new();
    for r in rows {
        for k in r.keys() {
            if !header.contains(&k.as_str()) {
                header.push(k);
            }
        }
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&header)?;
    for r in rows {
        w.write_record(
            header
                .iter()
                .map(|k| r.get(*k).map(cell).unwrap_or_default()),
        )?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn cells() {
        assert_eq!(cell(&json!({"num": 3, "den": 2})), "3/2");
        assert_eq!(cell(&json!({"num": 10, "den": 1})), "10");
        assert_eq!(
            cell(&json!({"re": {"num": 1, "den": 1}, "im": {"num": -1, "den": 2}})),
            "1-1/2i"
        );
        assert_eq!(cell(&json!([1, 2])), "[1,2]");
    }

    #[test]
    fn header_is_union_of_keys() {
        let rows = vec![
            json!({"a": 1, "b": "x,y"}).as_object().unwrap().clone(),
            json!({"a": 2, "c": true}).as_object().unwrap().clone(),
        ];
        let text = to_csv(&rows).unwrap();
        assert_eq!(text, "a,b,c\n1,\"x,y\",\n2,,true\n");
    }
}
