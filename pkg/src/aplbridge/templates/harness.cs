using System;
using System.Collections;
using System.Globalization;
using System.Text;

{CANDIDATE_CODE}

public static class __AplBridgeSerializer
{
    // Canonical output JSON: bare scalars, flat lists for rank 1,
    // row-major nested lists for rank 2; chars as one-char strings.
    public static string Serialize(object value)
    {
        var sb = new StringBuilder();
        Write(sb, value);
        return sb.ToString();
    }

    private static void Write(StringBuilder sb, object value)
    {
        if (value == null) { sb.Append("null"); return; }
        switch (value)
        {
            case bool b: sb.Append(b ? "true" : "false"); return;
            case char c: WriteString(sb, c.ToString()); return;
            case string s: WriteString(sb, s); return;
            case int i: sb.Append(i.ToString(CultureInfo.InvariantCulture)); return;
            case long l: sb.Append(l.ToString(CultureInfo.InvariantCulture)); return;
            case double d: sb.Append(d.ToString("R", CultureInfo.InvariantCulture)); return;
            case float f: sb.Append(f.ToString("R", CultureInfo.InvariantCulture)); return;
        }
        if (value is Array arr)
        {
            if (arr.Rank == 1)
            {
                sb.Append('[');
                for (int i = 0; i < arr.Length; i++)
                {
                    if (i > 0) sb.Append(',');
                    Write(sb, arr.GetValue(i));
                }
                sb.Append(']');
                return;
            }
            if (arr.Rank == 2)
            {
                sb.Append('[');
                for (int i = 0; i < arr.GetLength(0); i++)
                {
                    if (i > 0) sb.Append(',');
                    sb.Append('[');
                    for (int j = 0; j < arr.GetLength(1); j++)
                    {
                        if (j > 0) sb.Append(',');
                        Write(sb, arr.GetValue(i, j));
                    }
                    sb.Append(']');
                }
                sb.Append(']');
                return;
            }
            throw new ArgumentException("rank > 2 is unsupported");
        }
        if (value is IEnumerable seq)
        {
            sb.Append('[');
            bool first = true;
            foreach (var item in seq)
            {
                if (!first) sb.Append(',');
                first = false;
                Write(sb, item);
            }
            sb.Append(']');
            return;
        }
        throw new ArgumentException("unsupported result kind: " + value.GetType().Name);
    }

    private static void WriteString(StringBuilder sb, string s)
    {
        sb.Append('"');
        foreach (var ch in s)
        {
            if (ch == '"' || ch == '\\') sb.Append('\\').Append(ch);
            else if (ch == '\n') sb.Append("\\n");
            else sb.Append(ch);
        }
        sb.Append('"');
    }
}

public static class __AplBridgeHarness
{
    public static void Main()
    {
{TEST_INVOCATIONS}
    }
}
